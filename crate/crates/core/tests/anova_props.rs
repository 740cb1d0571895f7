mod common;

use common::laws::*;
use common::*;
use parcaus::anova::{anova_of, cardinal_and_mean, f_pvalue, Measurement};
use proptest::prelude::*;

proptest! {
    #[test]
    fn anova_identities((y, labels, picks) in anova_instance(20)) {
        anova_laws(&y, &labels, &picks)?;
    }

    #[test]
    fn push_forward_matches_the_coarse_partition(
        (y, ps) in (2..=15usize).prop_flat_map(|n| (values(n), proptest::collection::vec(partition_of_len(n, 6), 2)))
    ) {
        let y = Measurement::new(y).unwrap();
        let fine = ps[0].product(&ps[1]).unwrap();
        let coarse = &ps[0];
        let f = fine.find_arrow(coarse).unwrap();
        let d_fine = anova_of(&y, &fine).unwrap();
        let d_coarse = anova_of(&y, coarse).unwrap();
        let pushed = d_fine.push_forward(&f).unwrap();
        prop_assert_eq!(pushed.counts(), d_coarse.counts());
        for (u, v) in pushed.means().iter().zip(d_coarse.means()) {
            prop_assert!(close(*u, *v, 1e-9));
        }
        let (n1, mu1) = cardinal_and_mean(&d_fine);
        let (n2, mu2) = cardinal_and_mean(&d_coarse);
        prop_assert_eq!(n1, n2);
        prop_assert!(close(mu1, mu2, 1e-9));
    }

    #[test]
    fn p_values_fall_with_f(f1 in 0.0..50.0f64, f2 in 0.0..50.0f64, d1 in 1..10usize, d2 in 1..40usize) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let (p_lo, p_hi) = (f_pvalue(lo, d1, d2).unwrap(), f_pvalue(hi, d1, d2).unwrap());
        prop_assert!((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi));
        prop_assert!(p_hi <= p_lo + 1e-12);
    }
}
