use proptest::prelude::*;

use hdsteer::bounds::{h_best, h_cloning, h_recursive};
use hdsteer::certify::{
    certified_schmidt_number, witness_cloning, witness_pairs, witness_power_two,
};
use hdsteer::linalg::{kron, partial_trace_first, psd_sqrt, HermMatrix};
use hdsteer::parent::{operator_inequality_check, parent_pair_rank1};
use hdsteer::quantum::random::{random_pure_state, random_rank_one_povm, rng};
use hdsteer::quantum::MeasurementSet;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificate_is_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0, k in 2usize..9) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let cl = certified_schmidt_number(lo, k).unwrap();
        let ch = certified_schmidt_number(hi, k).unwrap();
        prop_assert!(cl.certified_n <= ch.certified_n);
        if ch.certified_n > 1 {
            prop_assert!(hi > h_best(k, ch.certified_n - 1).unwrap().sr_ceiling);
        }
    }

    #[test]
    fn witnesses_invert_ceilings(n in 1usize..200, r in 1u32..5) {
        let pair = 1.0 / h_best(2, n).unwrap().eta_lower - 1.0;
        prop_assert!((witness_pairs(pair).unwrap() - n as f64).abs() < 1e-8 * n as f64);
        let k = 1usize << r;
        let rec = 1.0 / h_recursive(k, n) - 1.0;
        prop_assert!((witness_power_two(rec, r).unwrap() - n as f64).abs() < 1e-6 * n as f64);
        let clo = 1.0 / h_cloning(k, n) - 1.0;
        prop_assert!((witness_cloning(clo, k).unwrap() - n as f64).abs() < 1e-6 * n as f64);
    }

    #[test]
    fn best_bound_dominates(k in 2usize..33, n in 1usize..101) {
        let b = h_best(k, n).unwrap();
        prop_assert!(b.eta_lower >= h_recursive(k, n) - 1e-15);
        prop_assert!(b.eta_lower >= h_cloning(k, n) - 1e-15);
        prop_assert!(b.sr_ceiling >= 0.0 && b.sr_ceiling < (k - 1) as f64);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let a = random_pure_state(da, &mut r);
        let b = random_pure_state(db, &mut r);
        let reduced = partial_trace_first(&kron(&a, &b), da, db).unwrap();
        prop_assert!(reduced.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn psd_square_root_squares_back(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let p = random_pure_state(n, &mut r);
        let q = random_pure_state(n, &mut r);
        let m = &p + &q.scale(0.5);
        let s = psd_sqrt(&m).unwrap();
        prop_assert!((s.matrix() * s.matrix() - m.matrix()).norm() < 1e-10);
    }

    #[test]
    fn pair_parent_is_a_measurement(seed in any::<u64>(), n in 2usize..5, extra in 0usize..3) {
        let mut r = rng(seed);
        let a = random_rank_one_povm(n, n + extra, &mut r).unwrap();
        let b = random_rank_one_povm(n, n + extra, &mut r).unwrap();
        prop_assert!(operator_inequality_check(&a, &b).unwrap() >= -1e-10);
        let g = parent_pair_rank1(&a, &b).unwrap();
        let total = g.elements.iter().fold(HermMatrix::zeros(n), |acc, e| &acc + e);
        prop_assert!(total.max_abs_diff(&HermMatrix::identity(n)) < 1e-9);
        let m = MeasurementSet::new(vec![a, b]).unwrap();
        let v = hdsteer::parent::verify_parent(&g, &m, g.eta_guarantee).unwrap();
        prop_assert!(v.worst_slack() >= -1e-7);
    }
}
