//! Plain segments: 0/1 masks over `N` genomic positions, 1-based.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlainSegment {
    bits: Vec<bool>,
}

impl PlainSegment {
    pub fn new(bits: Vec<bool>) -> Self {
        PlainSegment { bits }
    }

    pub fn zero(n: usize) -> Self {
        PlainSegment::new(vec![false; n])
    }

    /// The constant segment `1_N`.
    pub fn global(n: usize) -> Self {
        PlainSegment::new(vec![true; n])
    }

    pub fn from_support(n: usize, support: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &pos in support {
            if pos == 0 || pos > n {
                return Err(Error::PositionOutOfRange { position: pos, n });
            }
            bits[pos - 1] = true;
        }
        Ok(PlainSegment::new(bits))
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Value at 1-based position `pos`.
    pub fn get(&self, pos: usize) -> bool {
        self.bits[pos - 1]
    }

    pub fn is_zero(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Support `τ⁻¹(1)` as sorted 1-based positions.
    pub fn truncation(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
            .collect()
    }

    fn check_len(&self, other: &PlainSegment) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::SegmentLengthMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    pub fn sum(&self, other: &PlainSegment) -> Result<PlainSegment> {
        self.check_len(other)?;
        Ok(PlainSegment::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a | b)
                .collect(),
        ))
    }

    /// Fold of [`sum`](Self::sum) starting from the zero segment on `n` positions.
    pub fn sum_all<'a, I>(n: usize, parts: I) -> Result<PlainSegment>
    where
        I: IntoIterator<Item = &'a PlainSegment>,
    {
        parts
            .into_iter()
            .try_fold(PlainSegment::zero(n), |acc, t| acc.sum(t))
    }

    pub fn is_exact(&self, other: &PlainSegment) -> Result<bool> {
        self.check_len(other)?;
        Ok(!self.bits.iter().zip(&other.bits).any(|(a, b)| a & b))
    }

    /// `true` iff there is an arrow `self → target`, i.e. `support(target) ⊆ support(self)`.
    pub fn has_arrow_to(&self, target: &PlainSegment) -> Result<bool> {
        self.check_len(target)?;
        Ok(self.bits.iter().zip(&target.bits).all(|(s, t)| *s || !*t))
    }

    /// Exact sum decomposition into spans of at most `window` consecutive positions.
    ///
    /// Each part starts at the first support position `s` not yet covered and
    /// collects every support position in `s..s + window`.
    pub fn decompose(&self, window: usize) -> Result<Decomposition> {
        if window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        let support = self.truncation();
        let mut parts = Vec::new();
        let mut rest = &support[..];
        while let Some(&start) = rest.first() {
            let take = rest.iter().take_while(|&&p| p < start + window).count();
            parts.push(PlainSegment::from_support(self.n(), &rest[..take])?);
            rest = &rest[take..];
        }
        Ok(Decomposition { n: self.n(), parts })
    }

    /// Parse `0,1,1,...` (commas optional) or `support: 3,4,5` with `n` positions.
    pub fn parse_text(text: &str, n: Option<usize>) -> Result<PlainSegment> {
        let mut found = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if found.is_some() {
                return Err(Error::parse(idx + 1, "more than one segment"));
            }
            found = Some(parse_line(line, n).map_err(|m| Error::parse(idx + 1, m))?);
        }
        found.ok_or_else(|| Error::parse(1, "no segment found"))
    }
}

fn parse_line(line: &str, n: Option<usize>) -> std::result::Result<PlainSegment, String> {
    if let Some(rest) = line.strip_prefix("support:") {
        let n = n.ok_or("a support list needs the number of positions")?;
        let support = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| format!("bad position {s:?}"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        return PlainSegment::from_support(n, &support).map_err(|e| e.to_string());
    }
    let bits = line
        .chars()
        .filter(|c| *c != ',' && !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("unexpected character {other:?}")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(n) = n {
        if bits.len() != n {
            return Err(format!("expected {n} positions, got {}", bits.len()));
        }
    }
    Ok(PlainSegment::new(bits))
}

impl fmt::Display for PlainSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: Vec<&str> = self
            .bits
            .iter()
            .map(|&b| if b { "1" } else { "0" })
            .collect();
        write!(f, "{}", digits.join(","))
    }
}

impl FromStr for PlainSegment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlainSegment::parse_text(s, None)
    }
}

impl Serialize for PlainSegment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.truncation().serialize(serializer)
    }
}

/// Pairwise exact parts of a segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    n: usize,
    parts: Vec<PlainSegment>,
}

impl Decomposition {
    pub fn parts(&self) -> &[PlainSegment] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> PlainSegment {
        PlainSegment::sum_all(self.n, &self.parts).expect("parts share n")
    }

    pub fn is_pairwise_exact(&self) -> bool {
        self.parts.iter().enumerate().all(|(i, a)| {
            self.parts[i + 1..]
                .iter()
                .all(|b| a.is_exact(b).unwrap_or(false))
        })
    }
}
