//! Randomized invariants over small exact series and family parameters.

use kfam::catalog::make_family;
use kfam::khinchin;
use kfam::lagrange::{self, LagrangianSpec};
use kfam::numerics::LogNumber;
use kfam::par;
use kfam::series::{self, CoeffSeries};
use proptest::prelude::*;
use std::f64::consts::PI;

const ORDER: usize = 12;

/// Polynomials with a positive constant term and non-negative coefficients.
fn psi_strategy() -> impl Strategy<Value = CoeffSeries> {
    (1i64..5, prop::collection::vec(0i64..4, 1..5)).prop_map(|(c0, rest)| {
        let mut v = vec![c0];
        v.extend(rest);
        CoeffSeries::from_integers(&v, ORDER)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_recurrence_matches_repeated_product(psi in psi_strategy(), n in 1u64..9) {
        prop_assert_eq!(series::power_series(&psi, n, ORDER), series::pow(&psi, n));
    }

    #[test]
    fn inversion_matches_fixed_point(psi in psi_strategy()) {
        let inv = series::lagrange_invert(&psi, ORDER).unwrap();
        let fp = series::lagrange_fixed_point(&psi, ORDER).unwrap();
        prop_assert_eq!(inv, fp);
    }

    #[test]
    fn log_then_exp_is_identity(psi in psi_strategy()) {
        let l = series::log_series(&psi).unwrap();
        let e = series::exp_series(&l.series);
        prop_assert_eq!(e.series.scale(&l.scale), psi);
    }

    #[test]
    fn product_is_power_additive(psi in psi_strategy(), a in 1u64..5, b in 1u64..5) {
        let lhs = series::mul(&series::pow(&psi, a), &series::pow(&psi, b));
        prop_assert_eq!(lhs, series::pow(&psi, a + b));
    }

    #[test]
    fn masses_are_a_subprobability(t in 0.05f64..30.0) {
        let f = make_family(&"exp".parse().unwrap(), 4000).unwrap();
        let w = khinchin::mass_window(&f, t, None, None).unwrap();
        let total: f64 = w.masses.iter().sum();
        prop_assert!(w.masses.iter().all(|&m| m >= 0.0));
        prop_assert!(total <= 1.0 + 1e-12 && total >= 1.0 - w.tail_bound - 1e-12);
    }

    #[test]
    fn charfn_is_bounded(t in 0.01f64..0.95, theta in -PI..PI) {
        let f = make_family(&"geom".parse().unwrap(), 4000).unwrap();
        prop_assert!(khinchin::charfn(&f, t, theta).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn mean_increases_with_t(t in 0.05f64..0.9, dt in 0.001f64..0.05) {
        let f = make_family(&"P".parse().unwrap(), 4000).unwrap();
        prop_assert!(khinchin::mean(&f, t + dt).unwrap() > khinchin::mean(&f, t).unwrap());
    }

    #[test]
    fn log_numbers_add_commutatively(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let (x, y) = (LogNumber::from_ln(a), LogNumber::from_ln(b));
        let (l, r) = (x.add(&y).ln_abs(), y.add(&x).ln_abs());
        prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0));
    }

    #[test]
    fn parallel_map_keeps_order(len in 0usize..500) {
        let v = par::map_range(len, |i| i * i);
        prop_assert_eq!(v, (0..len).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn borel_pmf_is_normalized(t in 0.05f64..0.6, j in 1u64..4) {
        let total: f64 = (j..j + 400).map(|n| lagrange::borel_tanner_pmf(t, j, n).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sampler_replays_under_any_seed(seed in any::<u64>()) {
        let exp = make_family(&"exp".parse().unwrap(), 4000).unwrap();
        let spec = LagrangianSpec::borel(exp, 0.5, 1);
        let a = lagrange::gw_sample(&spec, 3000, seed, lagrange::GW_NODE_CAP).unwrap();
        let b = lagrange::gw_sample(&spec, 3000, seed, lagrange::GW_NODE_CAP).unwrap();
        prop_assert_eq!(a, b);
    }
}
