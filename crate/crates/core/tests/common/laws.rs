//! Law checks over generated inputs. Each returns a `TestCaseError` on the
//! first violation so the same body can run under `proptest!` or a manual
//! `TestRunner`.

use parcaus::anova::{anova_of, epsilon_arrow, f_ratio, kappa, nu, rho, AnovaReport, Measurement};
use parcaus::embedding::{
    brute_force_minimal, chi, default_r, is_optimal, is_solution, majority_r, RFunction,
};
use parcaus::genotype::GenotypeTable;
use parcaus::partition::Partition;
use parcaus::pipeline::{a1_with, RPolicy, DEFAULT_TOLERANCE};
use parcaus::segment::PlainSegment;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::*;

type Check = Result<(), TestCaseError>;

// ---- partition algebra ----

pub fn product_laws(ps: &[Partition]) -> Check {
    let (p, q, r) = (&ps[0], &ps[1], &ps[2]);
    let pq = p.product(q).unwrap();
    prop_assert_eq!(pq.assign().to_vec(), naive_product(p.assign(), q.assign()));
    prop_assert_eq!(&p.product(p).unwrap(), p);
    prop_assert_eq!(&pq, &q.product(p).unwrap());
    prop_assert_eq!(
        pq.product(r).unwrap(),
        p.product(&q.product(r).unwrap()).unwrap()
    );
    prop_assert!(pq.refines(p) && pq.refines(q));
    Ok(())
}

pub fn normalization(labels: &[usize]) -> Check {
    let p = part(labels);
    prop_assert_eq!(p.assign().to_vec(), canon(labels));
    prop_assert_eq!(part(p.assign()), p.clone());
    let blocks = p.num_blocks();
    prop_assert!(p.assign().iter().all(|&j| (1..=blocks).contains(&j)));
    Ok(())
}

pub fn fibers_round_trip(p: &Partition) -> Check {
    let back = Partition::delta_star(p.ground(), &p.fibers()).unwrap();
    prop_assert_eq!(&back, p);
    Ok(())
}

fn set_ops(x: &[bool], y: &[bool]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let minus =
        |a: &[bool], b: &[bool]| -> Vec<bool> { a.iter().zip(b).map(|(&s, &t)| s && !t).collect() };
    let cap: Vec<bool> = x.iter().zip(y).map(|(&s, &t)| s && t).collect();
    (subset(&minus(x, y)), subset(&minus(y, x)), subset(&cap))
}

pub fn rearrangement(masks: &[Vec<bool>]) -> Check {
    let (x, y) = (&masks[0], &masks[1]);
    let n = x.len();
    let lhs = delta(n, &subset(x)).product(&delta(n, &subset(y))).unwrap();
    let (x_minus_y, y_minus_x, cap) = set_ops(x, y);
    let rhs = product(&[
        &delta(n, &y_minus_x),
        &delta(n, &x_minus_y),
        &delta(n, &cap),
    ]);
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

pub fn cap_exchange(masks: &[Vec<bool>]) -> Check {
    let (x, y) = (&masks[0], &masks[1]);
    let n = x.len();
    let (x_minus_y, _, cap) = set_ops(x, y);
    let dx = delta(n, &subset(x));
    prop_assert_eq!(
        dx.product(&delta(n, &x_minus_y)).unwrap(),
        dx.product(&delta(n, &cap)).unwrap()
    );
    Ok(())
}

pub fn duality(mask: &[bool]) -> Check {
    let n = mask.len();
    let inverse: Vec<bool> = mask.iter().map(|b| !b).collect();
    let d = delta(n, &subset(mask));
    prop_assert_eq!(d.assign().to_vec(), naive_delta(mask));
    prop_assert_eq!(d, delta(n, &subset(&inverse)));
    Ok(())
}

/// `tags[s]`: 0 outside `x`, 1 in `x` only, `k + 2` in `x` and in `y_k`.
pub fn complement(tags: &[usize]) -> Check {
    let n = tags.len();
    let x: Vec<usize> = (0..n).filter(|&s| tags[s] > 0).collect();
    let rest: Vec<usize> = (0..n).filter(|&s| tags[s] == 1).collect();
    let families = tags.iter().copied().max().unwrap_or(0).saturating_sub(1);
    let ys: Vec<Partition> = (0..families)
        .map(|k| delta(n, &(0..n).filter(|&s| tags[s] == k + 2).collect::<Vec<_>>()))
        .collect();
    let with = |first: Partition| ys.iter().fold(first, |acc, d| acc.product(d).unwrap());
    prop_assert_eq!(with(delta(n, &x)), with(delta(n, &rest)));
    Ok(())
}

/// `tags[s]`: 0 nowhere, 1 in `x` only, 2 in `x` and `y`, 3 in `z`.
pub fn union(tags: &[usize]) -> Check {
    let n = tags.len();
    let pick = |keep: &dyn Fn(usize) -> bool| -> Vec<usize> {
        (0..n).filter(|&s| keep(tags[s])).collect()
    };
    let x = delta(n, &pick(&|t| t == 1 || t == 2));
    let y = delta(n, &pick(&|t| t == 2));
    let z = delta(n, &pick(&|t| t == 3));
    let y_or_z = delta(n, &pick(&|t| t == 2 || t == 3));
    prop_assert_eq!(product(&[&x, &y, &z]), x.product(&y_or_z).unwrap());
    Ok(())
}

/// `xz[s]`: 0 neither, 1 in `x`, 2 in `z`; `x ∩ z = ∅`.
pub fn triple(xz: &[usize], y: &[bool]) -> Check {
    let n = xz.len();
    let sel = |f: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..n).filter(|&s| f(s)).collect() };
    let x = delta(n, &sel(&|s| xz[s] == 1));
    let y_minus_z = delta(n, &sel(&|s| y[s] && xz[s] != 2));
    let x_cap_y = delta(n, &sel(&|s| y[s] && xz[s] == 1));
    let y_minus_zx = delta(n, &sel(&|s| y[s] && xz[s] == 0));
    prop_assert_eq!(
        x.product(&y_minus_z).unwrap(),
        product(&[&x, &x_cap_y, &y_minus_zx])
    );
    Ok(())
}

pub fn universal_refinement(ps: &[Partition]) -> Check {
    let (p, q, z) = (&ps[0], &ps[1], &ps[2]);
    let pq = p.product(q).unwrap();
    prop_assert_eq!(pq.refines(p), naive_refines(pq.assign(), p.assign()));
    let zp = z.product(p).unwrap();
    let zpq = zp.product(q).unwrap();
    // zpq maps to both p and q, so it must map to their product
    prop_assert!(zpq.refines(&pq));
    prop_assert_eq!(z.refines(&pq), naive_refines(z.assign(), pq.assign()));
    Ok(())
}

// ---- embedding ----

pub fn tags_partition(
    n: usize,
    max_blocks: usize,
) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<f64>)> {
    (
        labels_of_len(n, max_blocks),
        labels_of_len(n, max_blocks),
        values(n),
    )
}

pub fn embedding_instance(
    max_n: usize,
) -> impl Strategy<Value = (Partition, Partition, Measurement)> {
    (1..=max_n)
        .prop_flat_map(|n| tags_partition(n, n.min(5)))
        .prop_map(|(a, b, y)| (part(&a), part(&b), Measurement::new(y).unwrap()))
}

pub fn chi_identity(a: &Partition, b: &Partition) -> Check {
    let ab = a.product(b).unwrap();
    for r in [default_r(a, b).unwrap(), majority_r(a, b).unwrap()] {
        prop_assert!(r.respects_containment(a, b));
        let seed = chi(&r, a, b).unwrap();
        prop_assert_eq!(&a.product(&seed).unwrap(), &ab);
    }
    Ok(())
}

/// Reductions of the seed under both r policies.
pub fn solver_laws(a: &Partition, b: &Partition, y: &Measurement) -> Check {
    chi_identity(a, b)?;
    let minimal = brute_force_minimal(a, b).unwrap();
    for policy in [RPolicy::MinElement, RPolicy::Majority] {
        let run = a1_with(a, b, y, policy, DEFAULT_TOLERANCE).unwrap();
        let fixed = a.product(&run.trace.start).unwrap();
        let mut prev = &run.trace.start;
        for step in &run.trace.steps {
            prop_assert_eq!(&a.product(&step.partition).unwrap(), &fixed);
            prop_assert_eq!(
                &prev.contract(step.pair.0, step.pair.1).unwrap(),
                &step.partition
            );
            prev = &step.partition;
        }
        let u = run.reduced();
        prop_assert!(naive_is_solution(a.assign(), u.assign(), b.assign()));
        prop_assert!(is_solution(a, u, b).unwrap());
        prop_assert!(is_optimal(a, b, u).unwrap());
        prop_assert!(minimal.contains(u), "{:?} not among {:?}", u, minimal);
    }
    Ok(())
}

/// Every optimal solution is minimal, and the minimal set is exactly what a
/// naive coarsening search finds.
pub fn optimal_implies_minimal(a: &Partition, b: &Partition) -> Check {
    let minimal = brute_force_minimal(a, b).unwrap();
    let all: Vec<Partition> = parcaus::embedding::all_partitions(a.ground()).collect();
    for x in &all {
        let sol = naive_is_solution(a.assign(), x.assign(), b.assign());
        prop_assert_eq!(sol, is_solution(a, x, b).unwrap());
        if !sol {
            continue;
        }
        let coarser_solution = all.iter().any(|z| {
            z != x
                && naive_refines(x.assign(), z.assign())
                && naive_is_solution(a.assign(), z.assign(), b.assign())
        });
        prop_assert_eq!(!coarser_solution, minimal.contains(x));
        if is_optimal(a, b, x).unwrap() {
            prop_assert!(minimal.contains(x));
        }
    }
    Ok(())
}

pub fn embedding_products(a: &Partition, x: &Partition, mask: &[bool], r_raw: &[usize]) -> Check {
    let n = a.len();
    let blocks_a = a.fibers();
    let blocks_x = x.fibers();
    let inside = |block: &[usize], keep: &dyn Fn(usize) -> bool| -> Vec<usize> {
        block.iter().copied().filter(|&s| keep(s)).collect()
    };
    let lhs = a.product(&delta(n, &subset(mask))).unwrap();
    let rhs = blocks_a.iter().fold(a.clone(), |acc, ai| {
        acc.product(&delta(n, &inside(ai, &|s| mask[s]))).unwrap()
    });
    prop_assert_eq!(lhs, rhs);

    let r: Vec<usize> = (0..blocks_a.len())
        .map(|i| r_raw[i % r_raw.len()] % blocks_x.len())
        .collect();
    let mut rhs = a.clone();
    for (i, ai) in blocks_a.iter().enumerate() {
        for (j, xj) in blocks_x.iter().enumerate() {
            if j != r[i] {
                rhs = rhs
                    .product(&delta(n, &inside(ai, &|s| xj.contains(&s))))
                    .unwrap();
            }
        }
    }
    prop_assert_eq!(a.product(x).unwrap(), rhs);

    let r = RFunction::new(r.iter().map(|j| j + 1).collect(), x.num_blocks()).unwrap();
    prop_assert_eq!(
        a.product(&chi(&r, a, x).unwrap()).unwrap(),
        a.product(x).unwrap()
    );
    Ok(())
}

// ---- ANOVA ----

pub fn anova_instance(
    max_n: usize,
) -> impl Strategy<Value = (Vec<f64>, Vec<usize>, Vec<(usize, usize)>)> {
    (2..=max_n).prop_flat_map(|n| (values(n), labels_of_len(n, n), vec((0..n, 0..n), 0..n)))
}

pub fn anova_laws(values: &[f64], labels: &[usize], picks: &[(usize, usize)]) -> Check {
    let y = Measurement::new(values.to_vec()).unwrap();
    let n = y.len();
    let total = y.total_sum_of_squares();
    let scale = total.max(1.0);

    let start = part(labels);
    let mut chain = vec![start.clone()];
    let mut step_eps = Vec::new();
    for &(u, v) in picks {
        let cur = chain.last().unwrap();
        let g = cur.num_blocks();
        if g < 2 {
            break;
        }
        let (j1, j2) = (u % g + 1, v % g + 1);
        if j1 == j2 {
            continue;
        }
        let d = anova_of(&y, cur).unwrap();
        let closed = d.epsilon_contraction(j1, j2).unwrap();
        let next = cur.contract(j1, j2).unwrap();
        let by_arrow = epsilon_arrow(&d, &anova_of(&y, &next).unwrap()).unwrap();
        prop_assert!(closed >= 0.0);
        prop_assert!(by_arrow >= -1e-9 * scale);
        prop_assert!(close(closed, by_arrow, 1e-9) || (closed - by_arrow).abs() <= 1e-9 * scale);
        prop_assert_eq!(
            d.merged(j1, j2).unwrap().counts().to_vec(),
            anova_of(&y, &next).unwrap().counts().to_vec()
        );
        step_eps.push(closed);
        chain.push(next);
    }

    for p in &chain {
        let report = AnovaReport::new(&y, p).unwrap();
        let g = p.num_blocks();
        let (means, counts, within) = naive_groups(values, p.assign());
        let d = anova_of(&y, p).unwrap();
        prop_assert_eq!(d.counts(), counts.as_slice());
        for (m, want) in d.means().iter().zip(&means) {
            prop_assert!(close(*m, *want, 1e-9));
        }
        let conserved = (n - g) as f64 * report.rho + (g - 1) as f64 * report.eta;
        prop_assert!(close(total, conserved, 1e-9), "{} vs {}", total, conserved);
        prop_assert!((report.rho * (n - g) as f64 - within).abs() <= 1e-9 * scale);
        let (n0, mu0) = (report.n, report.mu);
        prop_assert_eq!(n0, n);
        prop_assert!(close(mu0, y.mean(), 1e-9));
    }

    let first = anova_of(&y, &chain[0]).unwrap();
    let last = anova_of(&y, chain.last().unwrap()).unwrap();
    let composite = epsilon_arrow(&first, &last).unwrap();
    let summed: f64 = step_eps.iter().sum();
    prop_assert!(
        (composite - summed).abs() <= 1e-9 * scale,
        "{} vs {}",
        composite,
        summed
    );

    // the F change bound along the composite arrow
    let (p1, p2) = (&chain[0], chain.last().unwrap());
    let (g1, g2) = (p1.num_blocks(), p2.num_blocks());
    if 1 < g2 && g2 <= g1 && g1 < n && rho(&y, p1).unwrap() > 0.0 {
        let f1 = f_ratio(&y, p1).unwrap().unwrap();
        let f2 = f_ratio(&y, p2).unwrap().unwrap();
        let lhs = nu(p1, p2).unwrap() * f1 - composite / total * kappa(p2).unwrap();
        prop_assert!(lhs >= f2 - 1e-9, "{} < {}", lhs, f2);
    }
    Ok(())
}

// ---- genotypes ----

/// A table plus `pairs` tag vectors over its positions: 0 in neither, 1 in the first, 2 in both/second.
pub fn table_with_tags(
    max_individuals: usize,
    max_positions: usize,
    pairs: usize,
) -> impl Strategy<Value = (GenotypeTable, Vec<Vec<usize>>)> {
    genotype_table(max_individuals, max_positions).prop_flat_map(move |t| {
        let m = t.positions();
        (Just(t), vec(vec(0..3usize, m), pairs))
    })
}

fn seg_where(tags: &[usize], keep: impl Fn(usize) -> bool) -> PlainSegment {
    PlainSegment::new(tags.iter().map(|&t| keep(t)).collect())
}

pub fn pedigrad_laws(table: &GenotypeTable, tags: &[Vec<usize>]) -> Check {
    let full = table
        .partition_at(&PlainSegment::global(table.positions()))
        .unwrap();
    for t in tags {
        // exact pair
        let t1 = seg_where(t, |k| k == 1);
        let t2 = seg_where(t, |k| k == 2);
        prop_assert!(table.pedigrad_check(&t1, &t2).unwrap());
        // nested pair: t2 ⊆ t1
        let outer = seg_where(t, |k| k > 0);
        let inner = seg_where(t, |k| k == 2);
        prop_assert!(outer.has_arrow_to(&inner).unwrap());
        let (po, pi) = (
            table.partition_at(&outer).unwrap(),
            table.partition_at(&inner).unwrap(),
        );
        prop_assert!(po.find_arrow(&pi).is_some());
        prop_assert!(full.refines(&po));
    }
    Ok(())
}
