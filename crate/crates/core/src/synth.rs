//! Seeded synthetic cohorts with a planted genotype→phenotype effect.
//!
//! Every position is biallelic; both chromatids draw the minor allele
//! independently with the position's frequency. The RNG is ChaCha8 seeded
//! from a `u64`, so a spec always produces the same cohort on any platform.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::anova::Measurement;
use crate::error::{Error, Result};
use crate::genotype::{Allele, AllelePair, GenotypeTable};
use crate::segment::PlainSegment;

const NUCLEOTIDES: [Allele; 4] = [Allele::A, Allele::C, Allele::G, Allele::T];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Effect {
    /// `gap` per copy of the minor allele, summed over the planted positions.
    Additive { gap: f64 },
    /// `gap` when an odd number of planted positions carry the minor allele.
    Xor { gap: f64 },
    /// Explicit mean for each joint minor-allele dosage vector.
    Table { entries: Vec<(Vec<u8>, f64)> },
}

impl Effect {
    fn mean(&self, dosages: &[u8]) -> Result<f64> {
        match self {
            Effect::Additive { gap } => Ok(gap * dosages.iter().map(|&d| d as f64).sum::<f64>()),
            Effect::Xor { gap } => {
                let carriers = dosages.iter().filter(|&&d| d > 0).count();
                Ok(if carriers % 2 == 1 { *gap } else { 0.0 })
            }
            Effect::Table { entries } => entries
                .iter()
                .find(|(k, _)| k.as_slice() == dosages)
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    Error::InvalidSpec(format!("effect table has no entry for dosages {dosages:?}"))
                }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub seed: u64,
    pub individuals: usize,
    pub positions: usize,
    /// 1-based planted positions.
    pub planted_support: Vec<usize>,
    pub effect: Effect,
    pub noise_sd: f64,
    /// Minor allele frequency per position.
    pub allele_freqs: Vec<f64>,
}

impl PlantSpec {
    /// Spec with the same minor allele frequency at every position.
    pub fn uniform(
        seed: u64,
        individuals: usize,
        positions: usize,
        planted_support: Vec<usize>,
        effect: Effect,
        noise_sd: f64,
        maf: f64,
    ) -> Self {
        PlantSpec {
            seed,
            individuals,
            positions,
            planted_support,
            effect,
            noise_sd,
            allele_freqs: vec![maf; positions],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.individuals == 0 {
            return Err(Error::EmptyGroundSet);
        }
        if self.positions == 0 {
            return Err(Error::InvalidSpec("no positions".into()));
        }
        if self.allele_freqs.len() != self.positions {
            return Err(Error::InvalidSpec(format!(
                "{} allele frequencies for {} positions",
                self.allele_freqs.len(),
                self.positions
            )));
        }
        if let Some(f) = self.allele_freqs.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::InvalidSpec(format!(
                "allele frequency {f} outside [0, 1]"
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidSpec(format!("noise sd {}", self.noise_sd)));
        }
        let mut seen = vec![false; self.positions];
        for &q in &self.planted_support {
            if q == 0 || q > self.positions {
                return Err(Error::PositionOutOfRange {
                    position: q,
                    n: self.positions,
                });
            }
            if std::mem::replace(&mut seen[q - 1], true) {
                return Err(Error::InvalidSpec(format!("position {q} planted twice")));
            }
        }
        match &self.effect {
            Effect::Additive { gap } | Effect::Xor { gap } if !gap.is_finite() => {
                Err(Error::InvalidSpec(format!("effect gap {gap}")))
            }
            _ => Ok(()),
        }
    }

    pub fn planted_segment(&self) -> Result<PlainSegment> {
        PlainSegment::from_support(self.positions, &self.planted_support)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassEntry {
    pub dosages: Vec<u8>,
    pub mean: f64,
    pub count: usize,
}

/// Ground truth written next to a generated cohort.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truth {
    pub seed: u64,
    pub planted_support: Vec<usize>,
    pub effect: Effect,
    pub noise_sd: f64,
    /// Observed joint dosage classes at the planted positions.
    pub classes: Vec<ClassEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cohort {
    pub genotypes: GenotypeTable,
    pub phenotype: Measurement,
    /// Minor allele dosage, `dosages[individual][position - 1]`.
    pub dosages: Vec<Vec<u8>>,
    pub truth: Truth,
}

pub fn individual_id(i: usize) -> String {
    format!("ind{:04}", i + 1)
}

pub fn generate(spec: &PlantSpec) -> Result<Cohort> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, m) = (spec.individuals, spec.positions);
    let mut rows = vec![Vec::with_capacity(m); n];
    let mut dosages = vec![Vec::with_capacity(m); n];
    for &maf in &spec.allele_freqs {
        let pick = sample(&mut rng, NUCLEOTIDES.len(), 2);
        let (major, minor) = (NUCLEOTIDES[pick.index(0)], NUCLEOTIDES[pick.index(1)]);
        for (row, dose) in rows.iter_mut().zip(dosages.iter_mut()) {
            let first = rng.random_bool(maf);
            let second = rng.random_bool(maf);
            let allele = |is_minor: bool| if is_minor { minor } else { major };
            row.push(AllelePair(allele(first), allele(second)));
            dose.push(first as u8 + second as u8);
        }
    }

    let noise =
        Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidSpec(format!("noise: {e}")))?;
    let mut classes: BTreeMap<Vec<u8>, (f64, usize)> = BTreeMap::new();
    let mut values = Vec::with_capacity(n);
    for dose in &dosages {
        let key: Vec<u8> = spec.planted_support.iter().map(|&q| dose[q - 1]).collect();
        let mean = spec.effect.mean(&key)?;
        classes.entry(key).or_insert((mean, 0)).1 += 1;
        let eps = if spec.noise_sd > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        values.push(mean + eps);
    }

    let ids = (0..n).map(individual_id).collect();
    Ok(Cohort {
        genotypes: GenotypeTable::new(ids, rows, false)?,
        phenotype: Measurement::new(values)?,
        dosages,
        truth: Truth {
            seed: spec.seed,
            planted_support: spec.planted_support.clone(),
            effect: spec.effect.clone(),
            noise_sd: spec.noise_sd,
            classes: classes
                .into_iter()
                .map(|(dosages, (mean, count))| ClassEntry {
                    dosages,
                    mean,
                    count,
                })
                .collect(),
        },
    })
}
