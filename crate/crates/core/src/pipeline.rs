//! Association search: the greedy minimal-solution builder (`a1`), the
//! segment localizer (`a2`), the alternating driver (`a3`) and the checker
//! for the three association conditions.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::anova::{anova_of, f_pvalue, f_ratio, Measurement};
use crate::embedding::{
    chi, default_r, is_optimal, is_solution, majority_r, reduce, PairSelector, RFunction,
    ReductionTrace, Selection,
};
use crate::error::{Error, Result};
use crate::genotype::{GenotypeTable, PhenotypeClassifier};
use crate::partition::Partition;
use crate::segment::PlainSegment;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// How `a1` builds the r-function that seeds its reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RPolicy {
    /// Block of the least element.
    #[default]
    MinElement,
    /// Block with the largest overlap.
    Majority,
}

impl RPolicy {
    pub fn build(self, a: &Partition, b: &Partition) -> Result<RFunction> {
        match self {
            RPolicy::MinElement => default_r(a, b),
            RPolicy::Majority => majority_r(a, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub window: usize,
    pub iterations: usize,
    /// `None` uses the rayon default.
    pub workers: Option<usize>,
    pub tolerance: f64,
    pub r_policy: RPolicy,
    pub phased: bool,
    pub classifier: PhenotypeClassifier,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 1,
            iterations: 2,
            workers: None,
            tolerance: DEFAULT_TOLERANCE,
            r_policy: RPolicy::MinElement,
            phased: false,
            classifier: PhenotypeClassifier::ExactValue,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(
                "tolerance must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            builder = builder.num_threads(w);
        }
        builder
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
    }
}

/// Contracts the admissible pair of least between-group change; near-ties go
/// to the lexicographically smallest pair.
pub struct EpsilonGreedy<'a> {
    y: &'a Measurement,
    tolerance: f64,
}

impl<'a> EpsilonGreedy<'a> {
    pub fn new(y: &'a Measurement, tolerance: f64) -> Self {
        EpsilonGreedy { y, tolerance }
    }
}

impl PairSelector for EpsilonGreedy<'_> {
    fn select(&mut self, x: &Partition, candidates: &[(usize, usize)]) -> Result<Selection> {
        let d = anova_of(self.y, x)?;
        let costs = candidates
            .iter()
            .map(|&(j1, j2)| d.epsilon_contraction(j1, j2))
            .collect::<Result<Vec<f64>>>()?;
        let least = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let cutoff = least + self.tolerance * least.abs().max(1.0);
        let pick = costs.iter().position(|&c| c <= cutoff).unwrap_or(0);
        Ok(Selection {
            pair: candidates[pick],
            cost: Some(costs[pick]),
        })
    }
}

/// Everything `a1` computed on its way to the reduced element.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A1Run {
    pub r: RFunction,
    pub chi: Partition,
    pub trace: ReductionTrace,
}

impl A1Run {
    pub fn reduced(&self) -> &Partition {
        &self.trace.reduced
    }
}

pub fn a1_with(
    a: &Partition,
    b: &Partition,
    y: &Measurement,
    policy: RPolicy,
    tolerance: f64,
) -> Result<A1Run> {
    if y.len() != a.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: y.len(),
        });
    }
    let r = policy.build(a, b)?;
    let chi = chi(&r, a, b)?;
    let trace = reduce(a, &chi, &mut EpsilonGreedy::new(y, tolerance))?;
    Ok(A1Run { r, chi, trace })
}

/// An optimal solution of `(a, b)` built by ε-greedy reduction of the seed.
pub fn a1(a: &Partition, b: &Partition, y: &Measurement) -> Result<Partition> {
    Ok(a1_with(a, b, y, RPolicy::MinElement, DEFAULT_TOLERANCE)?
        .trace
        .reduced)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub segment: PlainSegment,
    pub solution: Partition,
    pub f_ratio: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A2Run {
    /// Components in decomposition order.
    pub components: Vec<Component>,
    /// Component indices sorted by ascending F, absent F last.
    pub order: Vec<usize>,
    /// Number of sorted components kept.
    pub kept: usize,
    pub tau: PlainSegment,
}

/// Absent F-ratios rank above every finite one.
fn by_f_ratio(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn component_stats(y: &Measurement, x: &Partition) -> Result<(Option<f64>, Option<f64>)> {
    let f = f_ratio(y, x)?;
    let (g, n) = (x.num_blocks(), x.len());
    let p = match f {
        Some(f) if g > 1 && n > g => Some(f_pvalue(f, g - 1, n - g)?),
        _ => None,
    };
    Ok((f, p))
}

pub fn a2_run(
    b: &Partition,
    gamma: &GenotypeTable,
    t: &PlainSegment,
    e: &Partition,
    y: &Measurement,
    cfg: &PipelineConfig,
) -> Result<A2Run> {
    cfg.validate()?;
    if !is_solution(&gamma.partition_at(t)?, e, b)? {
        return Err(Error::NotASolutionAtSegment);
    }
    let parts = t.decompose(cfg.window)?;
    let solve = |seg: &PlainSegment| -> Result<Component> {
        let a = gamma.partition_at(seg)?.product(e)?;
        let x = a1_with(&a, b, y, cfg.r_policy, cfg.tolerance)?
            .trace
            .reduced;
        let (f_ratio, p_value) = component_stats(y, &x)?;
        Ok(Component {
            segment: seg.clone(),
            solution: x,
            f_ratio,
            p_value,
        })
    };
    let components = cfg.pool()?.install(|| {
        parts
            .parts()
            .par_iter()
            .map(solve)
            .collect::<Result<Vec<_>>>()
    })?;

    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|&i, &j| by_f_ratio(components[i].f_ratio, components[j].f_ratio));

    let mut tau = PlainSegment::zero(t.n());
    let mut joint = Partition::terminal(e.ground());
    let mut kept = 0;
    while !is_solution(&joint, e, b)? {
        // the full sum is P(t) by the pedigrad property, so this terminates
        let c = &components[order[kept]];
        joint = joint.product(&gamma.partition_at(&c.segment)?)?;
        tau = tau.sum(&c.segment)?;
        kept += 1;
    }
    Ok(A2Run {
        components,
        order,
        kept,
        tau,
    })
}

/// Shortest ascending-F prefix of the decomposition of `t` at which `e` still solves.
pub fn a2(
    b: &Partition,
    gamma: &GenotypeTable,
    t: &PlainSegment,
    e: &Partition,
    y: &Measurement,
    cfg: &PipelineConfig,
) -> Result<PlainSegment> {
    Ok(a2_run(b, gamma, t, e, y, cfg)?.tau)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A3Run {
    pub e: Partition,
    pub tau: PlainSegment,
    /// The pass over the global segment.
    pub first_pass: A2Run,
    pub passes: usize,
}

pub fn a3_run(
    b: &Partition,
    gamma: &GenotypeTable,
    y: &Measurement,
    cfg: &PipelineConfig,
) -> Result<A3Run> {
    cfg.validate()?;
    if y.len() != gamma.individuals() || b.len() != gamma.individuals() {
        return Err(Error::LengthMismatch {
            expected: gamma.individuals(),
            got: if y.len() != gamma.individuals() {
                y.len()
            } else {
                b.len()
            },
        });
    }
    if y.is_constant() {
        return Err(Error::DegeneratePhenotype);
    }
    let global = PlainSegment::global(gamma.positions());
    let e = a1_with(
        &gamma.partition_at(&global)?,
        b,
        y,
        cfg.r_policy,
        cfg.tolerance,
    )?
    .trace
    .reduced;
    let first_pass = a2_run(b, gamma, &global, &e, y, cfg)?;
    let mut tau = first_pass.tau.clone();
    let mut passes = 1;
    while passes < cfg.iterations {
        let next = a2(b, gamma, &tau, &e, y, cfg)?;
        passes += 1;
        if next == tau {
            break;
        }
        tau = next;
    }
    Ok(A3Run {
        e,
        tau,
        first_pass,
        passes,
    })
}

pub fn a3(
    b: &Partition,
    gamma: &GenotypeTable,
    y: &Measurement,
    cfg: &PipelineConfig,
) -> Result<(PlainSegment, Partition)> {
    let run = a3_run(b, gamma, y, cfg)?;
    Ok((run.tau, run.e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AssociationCheck {
    pub external_factors: bool,
    pub localization: bool,
    /// Only removals of whole decomposition components are considered.
    pub minimality: bool,
}

pub fn verify_association(
    b: &Partition,
    gamma: &GenotypeTable,
    e: &Partition,
    t: &PlainSegment,
    cfg: &PipelineConfig,
) -> Result<AssociationCheck> {
    let full = gamma.partition_at(&PlainSegment::global(gamma.positions()))?;
    let external_factors = is_solution(&full, e, b)? && is_optimal(&full, b, e)?;
    let localization = is_solution(&gamma.partition_at(t)?, e, b)?;
    let mut minimality = localization;
    if localization {
        let parts = t.decompose(cfg.window)?;
        let images = parts
            .parts()
            .iter()
            .map(|p| gamma.partition_at(p))
            .collect::<Result<Vec<_>>>()?;
        for skip in 0..images.len() {
            let rest = images
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, p)| p);
            let joint =
                Partition::product_all(rest)?.unwrap_or_else(|| Partition::terminal(e.ground()));
            if is_solution(&joint, e, b)? {
                minimality = false;
                break;
            }
        }
    }
    Ok(AssociationCheck {
        external_factors,
        localization,
        minimality,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GwasReport {
    pub tau_support: Vec<usize>,
    pub e_blocks: Vec<Vec<String>>,
    pub component_f_ratios: Vec<Option<f64>>,
    pub p_values: Vec<Option<f64>>,
    pub conditions: AssociationCheck,
    pub runtime_ms: u64,
}

/// Runs the alternating search and verifies the association it returns.
pub fn run_gwas(
    gamma: &GenotypeTable,
    y: &Measurement,
    b: &Partition,
    cfg: &PipelineConfig,
) -> Result<GwasReport> {
    let start = Instant::now();
    let run = a3_run(b, gamma, y, cfg)?;
    let conditions = verify_association(b, gamma, &run.e, &run.tau, cfg)?;
    let e_blocks = run
        .e
        .fibers()
        .into_iter()
        .map(|block| block.into_iter().map(|s| gamma.ids()[s].clone()).collect())
        .collect();
    let comps = &run.first_pass.components;
    Ok(GwasReport {
        tau_support: run.tau.truncation(),
        e_blocks,
        component_f_ratios: comps.iter().map(|c| c.f_ratio).collect(),
        p_values: comps.iter().map(|c| c.p_value).collect(),
        conditions,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}
