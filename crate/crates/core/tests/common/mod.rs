//! Independent reference implementations and generators shared by the
//! integration suites. Nothing here calls into the library's algorithms
//! except to build values for comparison.
#![allow(dead_code)]

use std::collections::BTreeMap;

use parcaus::genotype::{Allele, AllelePair, GenotypeTable};
use parcaus::partition::{GroundSet, Partition};
use proptest::collection::vec;
use proptest::prelude::*;

pub mod laws;

/// First-occurrence renumbering done by linear search.
pub fn canon<T: PartialEq>(labels: &[T]) -> Vec<usize> {
    let mut seen: Vec<&T> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| *s == l) {
            Some(k) => k + 1,
            None => {
                seen.push(l);
                seen.len()
            }
        })
        .collect()
}

pub fn naive_product(p: &[usize], q: &[usize]) -> Vec<usize> {
    let pairs: Vec<(usize, usize)> = p.iter().copied().zip(q.iter().copied()).collect();
    canon(&pairs)
}

pub fn naive_delta(mask: &[bool]) -> Vec<usize> {
    canon(mask)
}

/// `p → q` exists iff elements sharing a `p` block share a `q` block.
pub fn naive_refines(p: &[usize], q: &[usize]) -> bool {
    (0..p.len()).all(|s| (0..p.len()).all(|t| p[s] != p[t] || q[s] == q[t]))
}

pub fn naive_is_solution(a: &[usize], x: &[usize], b: &[usize]) -> bool {
    naive_refines(&naive_product(a, x), b)
}

/// (means, counts) by block id, plus within sum of squares, two-pass.
pub fn naive_groups(y: &[f64], p: &[usize]) -> (Vec<f64>, Vec<usize>, f64) {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&v, &k) in y.iter().zip(p) {
        groups.entry(k).or_default().push(v);
    }
    let mut means = Vec::new();
    let mut counts = Vec::new();
    let mut within = 0.0;
    for vals in groups.values() {
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        within += vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        means.push(m);
        counts.push(vals.len());
    }
    (means, counts, within)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

pub fn ground(n: usize) -> GroundSet {
    GroundSet::new(n).unwrap()
}

pub fn part(labels: &[usize]) -> Partition {
    Partition::from_labels(labels).unwrap()
}

pub fn subset(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter(|&(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

pub fn mask_of(n: usize, elements: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &s in elements {
        m[s] = true;
    }
    m
}

pub fn delta(n: usize, elements: &[usize]) -> Partition {
    Partition::delta(ground(n), elements).unwrap()
}

pub fn product(parts: &[&Partition]) -> Partition {
    Partition::product_all(parts.iter().copied())
        .unwrap()
        .expect("at least one factor")
}

// ---- generators ----

pub fn labels_of_len(n: usize, max_blocks: usize) -> impl Strategy<Value = Vec<usize>> {
    vec(0..max_blocks, n)
}

pub fn partition_of_len(n: usize, max_blocks: usize) -> impl Strategy<Value = Partition> {
    labels_of_len(n, max_blocks).prop_map(|l| part(&l))
}

/// `k` partitions on a shared ground set of size `1..=max_n`.
pub fn partitions(k: usize, max_n: usize) -> impl Strategy<Value = Vec<Partition>> {
    (1..=max_n).prop_flat_map(move |n| vec(partition_of_len(n, n.min(6)), k))
}

/// `k` subsets (as masks) of a shared ground set of size `1..=max_n`.
pub fn masks(k: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1..=max_n).prop_flat_map(move |n| vec(vec(any::<bool>(), n), k))
}

pub fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(
        prop_oneof![(-4i32..=4).prop_map(f64::from), -100.0..100.0f64],
        n,
    )
}

/// Random table with alleles drawn from a small alphabet so columns collide.
pub fn genotype_table(
    max_individuals: usize,
    max_positions: usize,
) -> impl Strategy<Value = GenotypeTable> {
    (1..=max_individuals, 1..=max_positions, 1..=4usize).prop_flat_map(|(n, m, k)| {
        vec(vec((0..k, 0..k), m), n).prop_map(|rows| {
            let nts = [Allele::A, Allele::C, Allele::G, Allele::T];
            let rows = rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|(x, y)| AllelePair(nts[x], nts[y]))
                        .collect()
                })
                .collect::<Vec<Vec<_>>>();
            let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
            GenotypeTable::new(ids, rows, false).unwrap()
        })
    })
}
