//! Diploid genotype tables, their segment-restricted partitions, and phenotype classes.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::anova::Measurement;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::segment::PlainSegment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Allele {
    A,
    C,
    G,
    T,
    Missing,
}

impl Allele {
    pub fn from_char(c: char) -> Option<Allele> {
        match c {
            'A' => Some(Allele::A),
            'C' => Some(Allele::C),
            'G' => Some(Allele::G),
            'T' => Some(Allele::T),
            '.' => Some(Allele::Missing),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Allele::A => 'A',
            Allele::C => 'C',
            Allele::G => 'G',
            Allele::T => 'T',
            Allele::Missing => '.',
        }
    }
}

/// A two-symbol genotype cell, stored in the order it was read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AllelePair(pub Allele, pub Allele);

impl AllelePair {
    /// Packed code; unphased pairs ignore chromatid order.
    pub fn code(self, phased: bool) -> u8 {
        let (x, y) = if phased || self.0 <= self.1 {
            (self.0, self.1)
        } else {
            (self.1, self.0)
        };
        x as u8 * 5 + y as u8
    }
}

impl FromStr for AllelePair {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut chars = s.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(x), Some(y), None) => match (Allele::from_char(x), Allele::from_char(y)) {
                (Some(x), Some(y)) => Ok(AllelePair(x, y)),
                _ => Err(format!("malformed genotype cell {s:?}")),
            },
            _ => Err(format!("genotype cell {s:?} must have two symbols")),
        }
    }
}

impl fmt::Display for AllelePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.as_char(), self.1.as_char())
    }
}

/// Individuals × positions matrix of allele pairs; row order is the ground order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenotypeTable {
    ids: Vec<String>,
    positions: usize,
    phased: bool,
    // codes[row * positions + col], already folded for the phasing mode
    codes: Vec<u8>,
    cells: Vec<AllelePair>,
}

impl GenotypeTable {
    pub fn new(ids: Vec<String>, rows: Vec<Vec<AllelePair>>, phased: bool) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        if ids.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} rows",
                ids.len(),
                rows.len()
            )));
        }
        let positions = rows[0].len();
        if let Some(r) = rows.iter().position(|r| r.len() != positions) {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} cells, expected {positions}",
                r + 1,
                rows[r].len()
            )));
        }
        let cells: Vec<AllelePair> = rows.into_iter().flatten().collect();
        let codes = cells.iter().map(|c| c.code(phased)).collect();
        Ok(GenotypeTable {
            ids,
            positions,
            phased,
            codes,
            cells,
        })
    }

    pub fn individuals(&self) -> usize {
        self.ids.len()
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn is_phased(&self) -> bool {
        self.phased
    }

    /// Cell at `row` (0-based individual) and 1-based position `pos`.
    pub fn cell(&self, row: usize, pos: usize) -> AllelePair {
        self.cells[row * self.positions + pos - 1]
    }

    pub fn with_phasing(&self, phased: bool) -> GenotypeTable {
        GenotypeTable {
            phased,
            codes: self.cells.iter().map(|c| c.code(phased)).collect(),
            ..self.clone()
        }
    }

    fn check_segment(&self, t: &PlainSegment) -> Result<()> {
        if t.n() != self.positions {
            return Err(Error::DimensionMismatch(format!(
                "segment over {} positions for a table with {}",
                t.n(),
                self.positions
            )));
        }
        Ok(())
    }

    /// Individuals share a block iff their cells agree on the whole support of `t`.
    pub fn partition_at(&self, t: &PlainSegment) -> Result<Partition> {
        self.check_segment(t)?;
        let support: Vec<usize> = t.truncation().iter().map(|p| p - 1).collect();
        let words = (0..self.individuals()).map(|row| {
            let base = row * self.positions;
            support
                .iter()
                .map(|&c| self.codes[base + c])
                .collect::<Vec<u8>>()
        });
        Partition::from_label_iter(words)
    }

    /// Partition induced by a single 1-based position.
    pub fn column_partition(&self, pos: usize) -> Result<Partition> {
        if pos == 0 || pos > self.positions {
            return Err(Error::PositionOutOfRange {
                position: pos,
                n: self.positions,
            });
        }
        Partition::from_label_iter(
            (0..self.individuals()).map(|row| self.codes[row * self.positions + pos - 1]),
        )
    }

    /// Compares the joint partition of an exact pair with the product of its parts.
    pub fn pedigrad_check(&self, t1: &PlainSegment, t2: &PlainSegment) -> Result<bool> {
        self.check_segment(t1)?;
        self.check_segment(t2)?;
        if !t1.is_exact(t2)? {
            return Err(Error::PairNotExact);
        }
        let joint = self.partition_at(&t1.sum(t2)?)?;
        let product = self.partition_at(t1)?.product(&self.partition_at(t2)?)?;
        Ok(joint == product)
    }
}

/// Maps phenotype values onto class labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhenotypeClassifier {
    /// One class per distinct value.
    ExactValue,
    /// `k` rank bins; tied values share a bin.
    QuantileBins(usize),
    /// Class `i` holds values in `[t_{i-1}, t_i)`; thresholds ascending.
    Thresholds(Vec<f64>),
}

impl PhenotypeClassifier {
    /// 1-based class label of every value.
    pub fn classify(&self, values: &[f64]) -> Result<Vec<usize>> {
        match self {
            PhenotypeClassifier::ExactValue => {
                // -0.0 and 0.0 are the same phenotype
                let keys: Vec<u64> = values.iter().map(|v| (v + 0.0).to_bits()).collect();
                Ok(Partition::from_labels(&keys)?.assign().to_vec())
            }
            PhenotypeClassifier::QuantileBins(k) => {
                if *k == 0 {
                    return Err(Error::ClassifierNotTotal("zero quantile bins".into()));
                }
                let n = values.len();
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                Ok(values
                    .iter()
                    .map(|v| {
                        let rank = sorted.partition_point(|s| s < v);
                        rank * k / n + 1
                    })
                    .collect())
            }
            PhenotypeClassifier::Thresholds(ts) => {
                if ts.iter().any(|t| !t.is_finite()) || ts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::ClassifierNotTotal(
                        "thresholds must be finite and strictly increasing".into(),
                    ));
                }
                Ok(values
                    .iter()
                    .map(|v| ts.partition_point(|t| t <= v) + 1)
                    .collect())
            }
        }
    }
}

/// The phenotype partition `b`: individuals share a block iff their classes agree.
pub fn phenotype_partition(y: &Measurement, c: &PhenotypeClassifier) -> Result<Partition> {
    Partition::from_labels(&c.classify(y.values())?)
}
