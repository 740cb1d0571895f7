//! Embedding problems `(a, b)`: find partitions `x` such that `a × x` refines `b`.
//!
//! The constructive route seeds a solution with [`chi`] and merges blocks
//! with [`reduce`] until no admissible pair is left; when `r` satisfies the
//! containment rule the reduced element is optimal, hence minimal.
//! [`brute_force_minimal`] enumerates every partition of a small ground set
//! and is only meant as a test oracle.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{GroundSet, Partition};

/// Largest ground set accepted by [`brute_force_minimal`].
pub const ORACLE_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingProblem {
    a: Partition,
    b: Partition,
}

impl EmbeddingProblem {
    pub fn new(a: Partition, b: Partition) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::GroundMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        Ok(EmbeddingProblem { a, b })
    }

    pub fn a(&self) -> &Partition {
        &self.a
    }

    pub fn b(&self) -> &Partition {
        &self.b
    }

    pub fn is_solution(&self, x: &Partition) -> Result<bool> {
        is_solution(&self.a, x, &self.b)
    }
}

/// `true` iff `a × x → b` exists.
pub fn is_solution(a: &Partition, x: &Partition, b: &Partition) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::GroundMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.product(x)?.refines(b))
}

/// A map from the blocks of `a` to the blocks of a target partition, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RFunction {
    map: Vec<usize>,
    target_blocks: usize,
}

impl RFunction {
    pub fn new(map: Vec<usize>, target_blocks: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&j| j == 0 || j > target_blocks) {
            return Err(Error::InvalidRFunction(format!(
                "value {bad} outside 1..={target_blocks}"
            )));
        }
        Ok(RFunction { map, target_blocks })
    }

    /// An r-function for the problem `(a, b)` that honours `a_i ⊆ b_j ⇒ r(i) = j`.
    pub fn for_problem(map: Vec<usize>, a: &Partition, b: &Partition) -> Result<Self> {
        let r = RFunction::new(map, b.num_blocks())?;
        if r.map.len() != a.num_blocks() {
            return Err(Error::InvalidRFunction(format!(
                "defined on {} blocks, a has {}",
                r.map.len(),
                a.num_blocks()
            )));
        }
        if !r.respects_containment(a, b) {
            return Err(Error::InvalidRFunction(
                "a block of a contained in a block of b is sent elsewhere".into(),
            ));
        }
        Ok(r)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn respects_containment(&self, a: &Partition, b: &Partition) -> bool {
        match a.find_arrow(b) {
            // every a-block sits inside a b-block, and r must pick it
            Some(f) => f.as_slice() == self.map.as_slice(),
            None => {
                let mut inside: Vec<Option<usize>> = vec![None; a.num_blocks()];
                let mut split = vec![false; a.num_blocks()];
                for (&i, &k) in a.assign().iter().zip(b.assign()) {
                    match inside[i - 1] {
                        None => inside[i - 1] = Some(k),
                        Some(prev) if prev != k => split[i - 1] = true,
                        _ => {}
                    }
                }
                inside
                    .iter()
                    .zip(&split)
                    .enumerate()
                    .all(|(i, (k, &sp))| sp || *k == Some(self.map[i]))
            }
        }
    }
}

/// `r(i)` = the block of `b` holding the least element of `a_i`.
pub fn default_r(a: &Partition, b: &Partition) -> Result<RFunction> {
    if a.len() != b.len() {
        return Err(Error::GroundMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut map = vec![0usize; a.num_blocks()];
    for (&i, &k) in a.assign().iter().zip(b.assign()) {
        if map[i - 1] == 0 {
            map[i - 1] = k;
        }
    }
    RFunction::new(map, b.num_blocks())
}

/// `r(i)` = the block of `b` meeting `a_i` in the most elements; ties go to the lower block.
pub fn majority_r(a: &Partition, b: &Partition) -> Result<RFunction> {
    if a.len() != b.len() {
        return Err(Error::GroundMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut best = vec![(0usize, 0usize); a.num_blocks()];
    for ((i, k), c) in intersection_counts(a, b) {
        let slot = &mut best[i - 1];
        if c > slot.1 || (c == slot.1 && k < slot.0) {
            *slot = (k, c);
        }
    }
    RFunction::new(best.into_iter().map(|(k, _)| k).collect(), b.num_blocks())
}

/// Intersection counts `|a_i ∩ x_j|`, keyed by `(i, j)`.
fn intersection_counts(a: &Partition, x: &Partition) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for (&i, &j) in a.assign().iter().zip(x.assign()) {
        *counts.entry((i, j)).or_insert(0) += 1;
    }
    counts
}

/// The seed solution `δ*({v_j})` with `v_j = (⋃_{i ∈ I(j)} a_i) ∩ x_j`, where
/// `I(j)` collects the blocks `a_i` that `x_j` cuts properly and that `r` does
/// not send to `j`.
pub fn chi(r: &RFunction, a: &Partition, x: &Partition) -> Result<Partition> {
    if a.len() != x.len() {
        return Err(Error::GroundMismatch {
            left: a.len(),
            right: x.len(),
        });
    }
    if r.map.len() != a.num_blocks() || r.target_blocks != x.num_blocks() {
        return Err(Error::InvalidRFunction(format!(
            "expected a map [{}] -> [{}], got [{}] -> [{}]",
            a.num_blocks(),
            x.num_blocks(),
            r.map.len(),
            r.target_blocks
        )));
    }
    let counts = intersection_counts(a, x);
    let a_sizes = a.block_sizes();
    let in_index_set = |i: usize, j: usize| {
        let c = counts.get(&(i, j)).copied().unwrap_or(0);
        r.apply(i) != j && c > 0 && c < a_sizes[i - 1]
    };
    let labels = a
        .assign()
        .iter()
        .zip(x.assign())
        .map(|(&i, &j)| if in_index_set(i, j) { j } else { 0 });
    Partition::from_label_iter(labels)
}

/// For every block of `x`, the set of `a`-blocks (0-based bits) meeting it.
fn meeting_sets(a: &Partition, x: &Partition) -> Vec<FixedBitSet> {
    let mut sets = vec![FixedBitSet::with_capacity(a.num_blocks()); x.num_blocks()];
    for (&i, &j) in a.assign().iter().zip(x.assign()) {
        sets[j - 1].insert(i - 1);
    }
    sets
}

/// Pairs `(j1, j2)`, `j1 < j2`, such that no block of `a` meets both `x_{j1}` and `x_{j2}`.
pub fn candidate_pairs(a: &Partition, x: &Partition) -> Result<Vec<(usize, usize)>> {
    if a.len() != x.len() {
        return Err(Error::GroundMismatch {
            left: a.len(),
            right: x.len(),
        });
    }
    let sets = meeting_sets(a, x);
    let mut pairs = Vec::new();
    for j1 in 0..sets.len() {
        for j2 in j1 + 1..sets.len() {
            if sets[j1].is_disjoint(&sets[j2]) {
                pairs.push((j1 + 1, j2 + 1));
            }
        }
    }
    Ok(pairs)
}

/// The pair picked by a [`PairSelector`], with the cost it was ranked by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub pair: (usize, usize),
    pub cost: Option<f64>,
}

/// Chooses which admissible pair a reduction contracts next.
///
/// `candidates` is non-empty and sorted lexicographically.
pub trait PairSelector {
    fn select(&mut self, x: &Partition, candidates: &[(usize, usize)]) -> Result<Selection>;
}

/// Always contracts the lexicographically first admissible pair.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstCandidate;

impl PairSelector for FirstCandidate {
    fn select(&mut self, _x: &Partition, candidates: &[(usize, usize)]) -> Result<Selection> {
        Ok(Selection {
            pair: candidates[0],
            cost: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionStep {
    /// Partition after the contraction.
    pub partition: Partition,
    pub pair: (usize, usize),
    pub cost: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionTrace {
    pub start: Partition,
    pub steps: Vec<ReductionStep>,
    pub reduced: Partition,
}

impl ReductionTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `u_0, u_1, ..., u*`
    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.partition))
    }
}

/// Contract admissible pairs of `x` (relative to `a`) until none is left.
pub fn reduce(
    a: &Partition,
    x: &Partition,
    selector: &mut dyn PairSelector,
) -> Result<ReductionTrace> {
    let mut current = x.clone();
    let mut steps = Vec::new();
    loop {
        let candidates = candidate_pairs(a, &current)?;
        if candidates.is_empty() {
            break;
        }
        let Selection { pair, cost } = selector.select(&current, &candidates)?;
        if !candidates.contains(&pair) {
            return Err(Error::InvalidBlockPair {
                j1: pair.0,
                j2: pair.1,
                blocks: current.num_blocks(),
            });
        }
        current = current.contract(pair.0, pair.1)?;
        steps.push(ReductionStep {
            partition: current.clone(),
            pair,
            cost,
        });
    }
    Ok(ReductionTrace {
        start: x.clone(),
        steps,
        reduced: current,
    })
}

/// Every pair of distinct blocks of `x` is separated by some `a_i` that meets
/// both of them in different blocks of `b`.
pub fn is_optimal(a: &Partition, b: &Partition, x: &Partition) -> Result<bool> {
    if !is_solution(a, x, b)? {
        return Err(Error::NotASolution);
    }
    let p = x.num_blocks();
    if p < 2 {
        return Ok(true);
    }
    // For a solution, a_i ∩ x_j lies inside a single block of b.
    let mut cells: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    for ((&i, &j), &k) in a.assign().iter().zip(x.assign()).zip(b.assign()) {
        if seen.insert((i, j), ()).is_none() {
            cells.entry(i).or_default().push((j, k));
        }
    }
    let mut witnessed = FixedBitSet::with_capacity(p * p);
    for row in cells.values() {
        for (n, &(j1, k1)) in row.iter().enumerate() {
            for &(j2, k2) in &row[n + 1..] {
                if k1 != k2 {
                    let (lo, hi) = (j1.min(j2) - 1, j1.max(j2) - 1);
                    witnessed.insert(lo * p + hi);
                }
            }
        }
    }
    Ok((0..p).all(|lo| (lo + 1..p).all(|hi| witnessed.contains(lo * p + hi))))
}

/// Restricted-growth enumeration of every partition of `ground`.
pub fn all_partitions(ground: GroundSet) -> impl Iterator<Item = Partition> {
    let n = ground.size();
    let mut rgs = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = Partition::from_labels(&rgs).expect("non-empty ground");
        // next restricted growth string
        let mut k = n;
        loop {
            if k <= 1 {
                done = true;
                break;
            }
            k -= 1;
            if rgs[k] <= maxes[k - 1] {
                rgs[k] += 1;
                let m = maxes[k - 1].max(rgs[k]);
                maxes[k] = m;
                for t in k + 1..n {
                    rgs[t] = 0;
                    maxes[t] = m;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Exhaustive set of minimal solutions of `(a, b)`, sorted.
///
/// A solution is minimal when no strictly coarser partition is a solution.
/// Solutions are closed under refinement, so it suffices to look at the
/// single contractions of each candidate.
pub fn brute_force_minimal(a: &Partition, b: &Partition) -> Result<Vec<Partition>> {
    if a.len() != b.len() {
        return Err(Error::GroundMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() > ORACLE_LIMIT {
        return Err(Error::OracleLimitExceeded {
            size: a.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let mut minimal = Vec::new();
    for x in all_partitions(a.ground()) {
        if !is_solution(a, &x, b)? {
            continue;
        }
        let mut coarser_solution = false;
        'outer: for j1 in 1..=x.num_blocks() {
            for j2 in j1 + 1..=x.num_blocks() {
                if is_solution(a, &x.contract(j1, j2)?, b)? {
                    coarser_solution = true;
                    break 'outer;
                }
            }
        }
        if !coarser_solution {
            minimal.push(x);
        }
    }
    minimal.sort();
    Ok(minimal)
}
