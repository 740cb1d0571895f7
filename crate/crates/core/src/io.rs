//! Text formats: genotype and phenotype TSV, partition and segment files.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::anova::Measurement;
use crate::error::{Error, Result};
use crate::genotype::{AllelePair, GenotypeTable};
use crate::partition::Partition;
use crate::segment::PlainSegment;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Header `id pos_1 ... pos_N`, then one row of two-symbol cells per individual.
pub fn parse_genotypes(text: &str, phased: bool) -> Result<GenotypeTable> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or(Error::EmptyGroundSet)?;
    let positions = header.split_whitespace().count().saturating_sub(1);
    if positions == 0 {
        return Err(Error::parse(1, "header lists no positions"));
    }
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (line, row) in lines {
        let mut fields = row.split_whitespace();
        let id = fields.next().expect("non-blank line");
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(line, format!("duplicate id {id:?}")));
        }
        let cells = fields
            .map(|c| c.parse::<AllelePair>().map_err(|m| Error::parse(line, m)))
            .collect::<Result<Vec<_>>>()?;
        if cells.len() != positions {
            return Err(Error::parse(
                line,
                format!(
                    "dimension mismatch: {} cells, header has {positions}",
                    cells.len()
                ),
            ));
        }
        ids.push(id.to_string());
        rows.push(cells);
    }
    if ids.is_empty() {
        return Err(Error::EmptyGroundSet);
    }
    GenotypeTable::new(ids, rows, phased)
}

pub fn read_genotypes(path: &Path, phased: bool) -> Result<GenotypeTable> {
    parse_genotypes(&read(path)?, phased)
}

pub fn write_genotypes(table: &GenotypeTable) -> String {
    let mut out = String::from("id");
    for p in 1..=table.positions() {
        let _ = write!(out, "\tpos_{p}");
    }
    out.push('\n');
    for (row, id) in table.ids().iter().enumerate() {
        out.push_str(id);
        for p in 1..=table.positions() {
            let _ = write!(out, "\t{}", table.cell(row, p));
        }
        out.push('\n');
    }
    out
}

/// Phenotype values in ground order.
#[derive(Clone, Debug, PartialEq)]
pub struct Phenotypes {
    pub measurement: Measurement,
    /// Set when the tokens were not all numeric; `measurement` then holds
    /// integer codes in order of first appearance.
    pub categories: Option<Vec<String>>,
}

impl Phenotypes {
    pub fn is_categorical(&self) -> bool {
        self.categories.is_some()
    }
}

/// `(id, token)` rows of a phenotype file; a leading `id ...` header is skipped.
pub fn parse_phenotype_rows(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (n, (line, row)) in content_lines(text).enumerate() {
        let fields: Vec<&str> = row.split_whitespace().collect();
        if n == 0
            && fields.first() == Some(&"id")
            && fields.len() == 2
            && fields[1].parse::<f64>().is_err()
        {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected 'id value', got {} fields", fields.len()),
            ));
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::parse(line, format!("duplicate id {:?}", fields[0])));
        }
        rows.push((line, fields[0].to_string(), fields[1].to_string()));
    }
    if rows.is_empty() {
        return Err(Error::EmptyGroundSet);
    }
    Ok(rows)
}

fn encode(tokens: Vec<(usize, String)>) -> Result<Phenotypes> {
    let numeric: std::result::Result<Vec<f64>, ()> = tokens
        .iter()
        .map(|(_, t)| t.parse::<f64>().map_err(|_| ()))
        .collect();
    match numeric {
        Ok(values) => {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::parse(
                    tokens[i].0,
                    format!("non-finite value {:?}", tokens[i].1),
                ));
            }
            Ok(Phenotypes {
                measurement: Measurement::new(values)?,
                categories: None,
            })
        }
        Err(()) => {
            let mut codes: HashMap<&str, usize> = HashMap::new();
            let mut categories = Vec::new();
            let values = tokens
                .iter()
                .map(|(_, t)| {
                    let next = codes.len();
                    let code = *codes.entry(t.as_str()).or_insert_with(|| {
                        categories.push(t.clone());
                        next
                    });
                    code as f64
                })
                .collect();
            Ok(Phenotypes {
                measurement: Measurement::new(values)?,
                categories: Some(categories),
            })
        }
    }
}

/// Phenotypes in the order of their own file.
pub fn parse_phenotypes_standalone(text: &str) -> Result<(Vec<String>, Phenotypes)> {
    let rows = parse_phenotype_rows(text)?;
    let ids = rows.iter().map(|(_, id, _)| id.clone()).collect();
    let tokens = rows.into_iter().map(|(l, _, t)| (l, t)).collect();
    Ok((ids, encode(tokens)?))
}

/// Phenotypes joined onto the individuals of `table`, in table order.
pub fn parse_phenotypes(text: &str, table: &GenotypeTable) -> Result<Phenotypes> {
    let rows = parse_phenotype_rows(text)?;
    let known: HashSet<&str> = table.ids().iter().map(String::as_str).collect();
    let extra: Vec<&str> = rows
        .iter()
        .filter(|(_, id, _)| !known.contains(id.as_str()))
        .map(|(_, id, _)| id.as_str())
        .collect();
    if !extra.is_empty() {
        let first = rows.iter().find(|(_, id, _)| id == extra[0]).unwrap().0;
        return Err(Error::parse(
            first,
            format!("ids not in genotype table: {}", extra.join(", ")),
        ));
    }
    let mut by_id: HashMap<&str, (usize, &str)> = rows
        .iter()
        .map(|(l, id, t)| (id.as_str(), (*l, t.as_str())))
        .collect();
    let missing: Vec<&str> = table
        .ids()
        .iter()
        .filter(|id| !by_id.contains_key(id.as_str()))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "ids missing from phenotype file: {}",
            missing.join(", ")
        )));
    }
    let tokens = table
        .ids()
        .iter()
        .map(|id| {
            let (l, t) = by_id.remove(id.as_str()).unwrap();
            (l, t.to_string())
        })
        .collect();
    encode(tokens)
}

pub fn read_phenotypes(path: &Path, table: &GenotypeTable) -> Result<Phenotypes> {
    parse_phenotypes(&read(path)?, table)
}

pub fn write_phenotypes(ids: &[String], y: &Measurement) -> String {
    let mut out = String::from("id\tvalue\n");
    for (id, v) in ids.iter().zip(y.values()) {
        let _ = writeln!(out, "{id}\t{v}");
    }
    out
}

/// A partition file, optionally checked against the expected ground set size.
pub fn parse_partition(text: &str, ground: Option<usize>) -> Result<Partition> {
    let p = Partition::parse_text(text)?;
    match ground {
        Some(n) if n != p.len() => Err(Error::GroundMismatch {
            left: p.len(),
            right: n,
        }),
        _ => Ok(p),
    }
}

pub fn read_partition(path: &Path, ground: Option<usize>) -> Result<Partition> {
    parse_partition(&read(path)?, ground)
}

pub fn write_partition(p: &Partition) -> String {
    format!("{}\n", p.to_block_text())
}

/// A segment given inline or as a path to a segment file.
pub fn parse_segment(path_or_literal: &str, n: usize) -> Result<PlainSegment> {
    let path = Path::new(path_or_literal);
    let text = if path.is_file() {
        read(path)?
    } else {
        path_or_literal.to_string()
    };
    let t = PlainSegment::parse_text(&text, Some(n))?;
    if t.n() != n {
        return Err(Error::SegmentLengthMismatch {
            left: t.n(),
            right: n,
        });
    }
    Ok(t)
}
