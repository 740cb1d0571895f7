//! One-way ANOVA over partitions of the individuals.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::partition::{BlockMap, Partition};

/// Relative tolerance used by identity checks on data objects.
pub const TOLERANCE: f64 = 1e-9;

/// Within-group sums below this fraction of the total sum are treated as exact zeros.
const ZERO_WITHIN: f64 = 1e-12;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = CompensatedSum::default();
    it.into_iter().for_each(|x| s.add(x));
    s.value()
}

/// One finite real measurement per individual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    values: Vec<f64>,
}

impl Measurement {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteMeasurement(i));
        }
        Ok(Measurement { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        compensated(self.values.iter().copied()) / self.len() as f64
    }

    /// Population variance `σ²`.
    pub fn variance(&self) -> f64 {
        self.total_sum_of_squares() / self.len() as f64
    }

    /// `|S|·σ²`
    pub fn total_sum_of_squares(&self) -> f64 {
        let mu = self.mean();
        compensated(self.values.iter().map(|v| (v - mu) * (v - mu)))
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    fn check_len(&self, p: &Partition) -> Result<()> {
        if p.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: p.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Group count, group means and group sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataObject {
    means: Vec<f64>,
    counts: Vec<usize>,
}

impl DataObject {
    pub fn new(means: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidDataObject("no groups".into()));
        }
        if means.len() != counts.len() {
            return Err(Error::InvalidDataObject(format!(
                "{} means for {} counts",
                means.len(),
                counts.len()
            )));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidDataObject("empty group".into()));
        }
        if let Some(i) = means.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataObject(format!(
                "mean {} is not finite",
                i + 1
            )));
        }
        Ok(DataObject { means, counts })
    }

    pub fn groups(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn cardinal(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        compensated(self.weighted()) / self.cardinal() as f64
    }

    fn weighted(&self) -> impl Iterator<Item = f64> + '_ {
        self.means
            .iter()
            .zip(&self.counts)
            .map(|(v, &c)| v * c as f64)
    }

    /// `Σ c_i (v_i − μ)²`
    pub fn between_sum_of_squares(&self) -> f64 {
        let mu = self.mean();
        compensated(
            self.means
                .iter()
                .zip(&self.counts)
                .map(|(v, &c)| c as f64 * (v - mu) * (v - mu)),
        )
    }

    /// Between-group mean square sum.
    pub fn eta(&self) -> f64 {
        match self.groups() {
            1 => 0.0,
            g => self.between_sum_of_squares() / (g - 1) as f64,
        }
    }

    /// Image along the block map `f`: counts and weighted sums are pushed forward.
    pub fn push_forward(&self, f: &BlockMap) -> Result<DataObject> {
        if f.source_blocks() != self.groups() {
            return Err(Error::DimensionMismatch(format!(
                "block map on {} groups applied to {}",
                f.source_blocks(),
                self.groups()
            )));
        }
        let mut counts = vec![0usize; f.target_blocks()];
        let mut sums = vec![CompensatedSum::default(); f.target_blocks()];
        for (i, w) in self.weighted().enumerate() {
            let k = f.apply(i + 1) - 1;
            counts[k] += self.counts[i];
            sums[k].add(w);
        }
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s.value() / c as f64)
            .collect();
        DataObject::new(means, counts)
    }

    /// Merge groups `j1` and `j2` (1-based); numbering follows [`Partition::contract`].
    pub fn merged(&self, j1: usize, j2: usize) -> Result<DataObject> {
        let (lo, hi) = self.check_pair(j1, j2)?;
        let mut means = self.means.clone();
        let mut counts = self.counts.clone();
        let (c_lo, c_hi) = (counts[lo - 1] as f64, counts[hi - 1] as f64);
        means[lo - 1] = (means[lo - 1] * c_lo + means[hi - 1] * c_hi) / (c_lo + c_hi);
        counts[lo - 1] += counts[hi - 1];
        means.remove(hi - 1);
        counts.remove(hi - 1);
        DataObject::new(means, counts)
    }

    /// Closed-form between-group change of merging `j1` and `j2`.
    pub fn epsilon_contraction(&self, j1: usize, j2: usize) -> Result<f64> {
        let (lo, hi) = self.check_pair(j1, j2)?;
        let (c1, c2) = (self.counts[lo - 1] as f64, self.counts[hi - 1] as f64);
        let gap = self.means[lo - 1] - self.means[hi - 1];
        Ok(c1 * c2 / (c1 + c2) * gap * gap)
    }

    fn check_pair(&self, j1: usize, j2: usize) -> Result<(usize, usize)> {
        let g = self.groups();
        if j1 == j2 || j1 == 0 || j2 == 0 || j1 > g || j2 > g {
            return Err(Error::InvalidGroupPair { j1, j2, groups: g });
        }
        Ok((j1.min(j2), j1.max(j2)))
    }
}

/// `(N, μ)` of a data object.
pub fn cardinal_and_mean(d: &DataObject) -> (usize, f64) {
    (d.cardinal(), d.mean())
}

/// `(g1 − 1)η(d1) − (g2 − 1)η(d2)` for data objects related by an arrow `d1 → d2`.
pub fn epsilon_arrow(d1: &DataObject, d2: &DataObject) -> Result<f64> {
    let (n1, mu1) = cardinal_and_mean(d1);
    let (n2, mu2) = cardinal_and_mean(d2);
    if n1 != n2 {
        return Err(Error::NotAnArrow(format!("cardinals {n1} and {n2} differ")));
    }
    if (mu1 - mu2).abs() > TOLERANCE * mu1.abs().max(mu2.abs()).max(1.0) {
        return Err(Error::NotAnArrow(format!("means {mu1} and {mu2} differ")));
    }
    Ok(d1.between_sum_of_squares() - d2.between_sum_of_squares())
}

pub fn anova_of(y: &Measurement, p: &Partition) -> Result<DataObject> {
    y.check_len(p)?;
    let mut counts = vec![0usize; p.num_blocks()];
    let mut sums = vec![CompensatedSum::default(); p.num_blocks()];
    for (&j, &v) in p.assign().iter().zip(&y.values) {
        counts[j - 1] += 1;
        sums[j - 1].add(v);
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.value() / c as f64)
        .collect();
    DataObject::new(means, counts)
}

/// `Σ_s (y(s) − μ(block of s))²`, clamped to zero when negligible.
pub fn within_sum_of_squares(y: &Measurement, p: &Partition) -> Result<f64> {
    let d = anova_of(y, p)?;
    if p.is_discrete() {
        return Ok(0.0);
    }
    let within = compensated(
        p.assign()
            .iter()
            .zip(&y.values)
            .map(|(&j, &v)| (v - d.means[j - 1]) * (v - d.means[j - 1])),
    );
    if within <= ZERO_WITHIN * y.total_sum_of_squares() {
        return Ok(0.0);
    }
    Ok(within)
}

/// Within-group mean square sum.
pub fn rho(y: &Measurement, p: &Partition) -> Result<f64> {
    let within = within_sum_of_squares(y, p)?;
    if within == 0.0 {
        return Ok(0.0);
    }
    Ok(within / (p.len() - p.num_blocks()) as f64)
}

/// `η / ρ`, absent when `ρ = 0`.
pub fn f_ratio(y: &Measurement, p: &Partition) -> Result<Option<f64>> {
    let r = rho(y, p)?;
    if r == 0.0 {
        return Ok(None);
    }
    Ok(Some(anova_of(y, p)?.eta() / r))
}

/// `(|S| − g) / (g − 1)`
pub fn kappa(p: &Partition) -> Result<f64> {
    let (n, g) = (p.len(), p.num_blocks());
    if g <= 1 || g >= n {
        return Err(Error::KappaUndefined(format!("{g} blocks on {n} elements")));
    }
    Ok((n - g) as f64 / (g - 1) as f64)
}

/// `κ(p2) / κ(p1)`
pub fn nu(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p2.num_blocks() > p1.num_blocks() {
        return Err(Error::KappaUndefined(format!(
            "target has more blocks ({}) than source ({})",
            p2.num_blocks(),
            p1.num_blocks()
        )));
    }
    Ok(kappa(p2)? / kappa(p1)?)
}

/// Upper tail of the F(d1, d2) distribution at `f`.
pub fn f_pvalue(f: f64, d1: usize, d2: usize) -> Result<f64> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidDegreesOfFreedom { d1, d2 });
    }
    if f.is_nan() || f < 0.0 {
        return Err(Error::InvalidFStatistic(f));
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let dist = FisherSnedecor::new(d1 as f64, d2 as f64)
        .map_err(|_| Error::InvalidDegreesOfFreedom { d1, d2 })?;
    Ok(dist.sf(f).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnovaReport {
    pub g: usize,
    pub n: usize,
    pub mu: f64,
    pub eta: f64,
    pub rho: f64,
    pub f_ratio: Option<f64>,
    pub p_value: Option<f64>,
    pub dof: (usize, usize),
}

impl AnovaReport {
    pub fn new(y: &Measurement, p: &Partition) -> Result<Self> {
        let d = anova_of(y, p)?;
        let (n, mu) = cardinal_and_mean(&d);
        let g = d.groups();
        let dof = (g - 1, n - g);
        let f = f_ratio(y, p)?;
        let p_value = match (f, dof) {
            (Some(f), (d1, d2)) if d1 > 0 && d2 > 0 => Some(f_pvalue(f, d1, d2)?),
            _ => None,
        };
        Ok(AnovaReport {
            g,
            n,
            mu,
            eta: d.eta(),
            rho: rho(y, p)?,
            f_ratio: f,
            p_value,
            dof,
        })
    }
}
