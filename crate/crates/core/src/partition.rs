//! Canonical partitions of a finite, totally ordered ground set.
//!
//! A [`Partition`] is stored as a block-assignment vector in canonical form:
//! block ids are `1..=n`, and scanning the elements in ground order every new
//! block receives the smallest unused id. Two partitions describe the same
//! set of blocks exactly when their vectors are equal, so products,
//! refinement queries and contractions all reduce to vector manipulation.
//!
//! Element indices are 0-based, block ids are 1-based.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// The finite ordered set `0 < 1 < ... < size-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroundSet {
    size: usize,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyGroundSet);
        }
        Ok(GroundSet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        match subset.iter().find(|&&s| s >= self.size) {
            Some(&element) => Err(Error::ElementOutOfRange {
                element,
                size: self.size,
            }),
            None => Ok(()),
        }
    }
}

/// A canonical unlabeled partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    assign: Vec<usize>,
    blocks: usize,
}

/// The unique block map `f` with `f ∘ p = q` witnessing a refinement `p → q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    target_blocks: usize,
    map: Vec<usize>,
}

impl BlockMap {
    pub fn source_blocks(&self) -> usize {
        self.map.len()
    }

    pub fn target_blocks(&self) -> usize {
        self.target_blocks
    }

    /// Image of the 1-based source block `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.map[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i + 1 == j)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &BlockMap) -> Option<BlockMap> {
        if next.source_blocks() != self.target_blocks {
            return None;
        }
        Some(BlockMap {
            target_blocks: next.target_blocks,
            map: self.map.iter().map(|&j| next.apply(j)).collect(),
        })
    }

    /// Fiber matrix: `target_blocks × source_blocks`, entry `(i, j)` is 1 iff `i = f(j)`.
    pub fn fiber_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.source_blocks()]; self.target_blocks];
        for (j, &i) in self.map.iter().enumerate() {
            m[i - 1][j] = 1;
        }
        m
    }
}

impl Partition {
    /// Canonical partition whose blocks are the fibers of `labels`.
    pub fn from_labels<T: Hash + Eq>(labels: &[T]) -> Result<Self> {
        Self::from_label_iter(labels.iter())
    }

    pub fn from_label_iter<T, I>(labels: I) -> Result<Self>
    where
        T: Hash + Eq,
        I: IntoIterator<Item = T>,
    {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let assign: Vec<usize> = labels
            .into_iter()
            .map(|label| {
                let next = ids.len() + 1;
                *ids.entry(label).or_insert(next)
            })
            .collect();
        if assign.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Partition {
            blocks: ids.len(),
            assign,
        })
    }

    /// Relabel a vector of small integer keys (`< bound`) by first occurrence.
    fn from_dense_keys(keys: impl Iterator<Item = usize>, bound: usize) -> Self {
        let mut ids = vec![0usize; bound];
        let mut blocks = 0;
        let assign = keys
            .map(|k| {
                if ids[k] == 0 {
                    blocks += 1;
                    ids[k] = blocks;
                }
                ids[k]
            })
            .collect();
        Partition { assign, blocks }
    }

    pub fn terminal(ground: GroundSet) -> Self {
        Partition {
            assign: vec![1; ground.size()],
            blocks: 1,
        }
    }

    pub fn discrete(ground: GroundSet) -> Self {
        Partition {
            assign: (1..=ground.size()).collect(),
            blocks: ground.size(),
        }
    }

    /// Two-block partition `{x, S∖x}`; the terminal partition when `x` is empty or full.
    pub fn delta(ground: GroundSet, x: &[usize]) -> Result<Self> {
        ground.check_subset(x)?;
        let mut inside = vec![false; ground.size()];
        for &s in x {
            inside[s] = true;
        }
        Ok(Self::from_dense_keys(inside.iter().map(|&b| b as usize), 2))
    }

    /// Familial partition: the non-empty members of `family` plus the complement of their union.
    pub fn delta_star(ground: GroundSet, family: &[Vec<usize>]) -> Result<Self> {
        let mut owner = vec![0usize; ground.size()];
        for (k, member) in family.iter().enumerate() {
            ground.check_subset(member)?;
            for &s in member {
                if owner[s] != 0 && owner[s] != k + 1 {
                    return Err(Error::FamilyNotDisjoint { element: s });
                }
                owner[s] = k + 1;
            }
        }
        Ok(Self::from_dense_keys(owner.into_iter(), family.len() + 1))
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet {
            size: self.assign.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    /// Block ids (1-based) indexed by element.
    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.assign[element]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.blocks];
        for &b in &self.assign {
            sizes[b - 1] += 1;
        }
        sizes
    }

    pub fn is_terminal(&self) -> bool {
        self.blocks == 1
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks == self.assign.len()
    }

    /// Blocks in block-id order, each listed in ground order.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fibers = vec![Vec::new(); self.blocks];
        for (s, &b) in self.assign.iter().enumerate() {
            fibers[b - 1].push(s);
        }
        fibers
    }

    fn check_ground(&self, other: &Partition) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::GroundMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    /// Common refinement: two elements share a block iff they do in both factors.
    pub fn product(&self, other: &Partition) -> Result<Partition> {
        self.check_ground(other)?;
        let width = other.blocks;
        let pairs = self
            .assign
            .iter()
            .zip(&other.assign)
            .map(|(&p, &q)| (p - 1) * width + (q - 1));
        match self.blocks.checked_mul(width) {
            Some(bound) if bound <= 1 << 22 => Ok(Self::from_dense_keys(pairs, bound)),
            _ => Self::from_label_iter(pairs),
        }
    }

    /// Product of a non-empty list of partitions over the same ground set.
    pub fn product_all<'a, I>(parts: I) -> Result<Option<Partition>>
    where
        I: IntoIterator<Item = &'a Partition>,
    {
        let mut acc: Option<Partition> = None;
        for p in parts {
            acc = Some(match acc {
                None => p.clone(),
                Some(a) => a.product(p)?,
            });
        }
        Ok(acc)
    }

    /// The block map `f` with `f ∘ self = target`, if every block of `self`
    /// lies inside a single block of `target`.
    pub fn find_arrow(&self, target: &Partition) -> Option<BlockMap> {
        if self.len() != target.len() {
            return None;
        }
        let mut map = vec![0usize; self.blocks];
        for (&p, &q) in self.assign.iter().zip(&target.assign) {
            let slot = &mut map[p - 1];
            if *slot == 0 {
                *slot = q;
            } else if *slot != q {
                return None;
            }
        }
        Some(BlockMap {
            target_blocks: target.blocks,
            map,
        })
    }

    /// True when `self` refines `target` (an arrow `self → target` exists).
    pub fn refines(&self, target: &Partition) -> bool {
        self.find_arrow(target).is_some()
    }

    /// Merge blocks `j1` and `j2` and renumber canonically.
    pub fn contract(&self, j1: usize, j2: usize) -> Result<Partition> {
        if j1 == j2 || j1 == 0 || j2 == 0 || j1 > self.blocks || j2 > self.blocks {
            return Err(Error::InvalidBlockPair {
                j1,
                j2,
                blocks: self.blocks,
            });
        }
        let (keep, gone) = (j1.min(j2), j1.max(j2));
        // Blocks are ordered by least element; the merged block inherits the
        // position of `keep`, and every block after `gone` shifts down by one.
        let assign = self
            .assign
            .iter()
            .map(|&b| match b.cmp(&gone) {
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => keep,
                std::cmp::Ordering::Greater => b - 1,
            })
            .collect();
        Ok(Partition {
            assign,
            blocks: self.blocks - 1,
        })
    }

    /// `blocks: {0,3} {1,2} {4}`
    pub fn to_block_text(&self) -> String {
        let body: Vec<String> = self
            .fibers()
            .iter()
            .map(|f| {
                let items: Vec<String> = f.iter().map(|s| s.to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        format!("blocks: {}", body.join(" "))
    }

    /// Parse either `assign: 1 2 2 1 3` or `blocks: {0,3} {1,2} {4}`.
    pub fn parse_text(text: &str) -> Result<Partition> {
        let mut content = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if content.is_some() {
                return Err(Error::parse(idx + 1, "more than one partition in input"));
            }
            content = Some((idx + 1, line));
        }
        let (line_no, line) = content.ok_or(Error::EmptyGroundSet)?;
        if let Some(rest) = line.strip_prefix("assign:") {
            let labels = rest
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::parse(line_no, format!("invalid block id '{tok}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            Partition::from_labels(&labels)
        } else if let Some(rest) = line.strip_prefix("blocks:") {
            parse_block_list(rest, line_no)
        } else {
            Err(Error::parse(
                line_no,
                "expected a line starting with 'assign:' or 'blocks:'",
            ))
        }
    }
}

fn parse_block_list(rest: &str, line_no: usize) -> Result<Partition> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut chars = rest.trim();
    while !chars.is_empty() {
        let open = chars
            .strip_prefix('{')
            .ok_or_else(|| Error::parse(line_no, "expected '{'"))?;
        let close = open
            .find('}')
            .ok_or_else(|| Error::parse(line_no, "unterminated block"))?;
        let inner = &open[..close];
        let block = inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(line_no, format!("invalid element '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if block.is_empty() {
            return Err(Error::parse(line_no, "empty block"));
        }
        blocks.push(block);
        chars = open[close + 1..].trim_start();
    }
    let size: usize = blocks.iter().map(Vec::len).sum();
    if size == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let mut owner = vec![usize::MAX; size];
    for (k, block) in blocks.iter().enumerate() {
        for &s in block {
            if s >= size {
                return Err(Error::parse(
                    line_no,
                    format!("element {s} out of range for {size} elements"),
                ));
            }
            if owner[s] != usize::MAX {
                return Err(Error::parse(line_no, format!("element {s} listed twice")));
            }
            owner[s] = k;
        }
    }
    Partition::from_labels(&owner)
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.assign.serialize(serializer)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_block_text())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Partition::parse_text(s)
    }
}
