mod common;

use std::f64::consts::FRAC_PI_2;

use common::{random_gram, random_priors, rng, scan_1d, two_state_ensemble};
use filterdisc::filtering::*;
use filterdisc::povm::{failure_probability, verify_povm, zero_conditions, Ensemble};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_state_closed_form_matches_scan(eta1 in 0.02f64..0.98, o in 0.01f64..0.99, phase in 0.0f64..std::f64::consts::TAU) {
        let ens = two_state_ensemble(eta1, o, phase);
        let closed = two_state_optimal(&ens).unwrap();
        let (_, scanned) = scan_1d(|w| failure_curve(&ens, w));
        prop_assert!((closed.f_opt - scanned).abs() <= 1e-7);
        prop_assert!((closed.design.failure - closed.f_opt).abs() <= 1e-12);
    }

    #[test]
    fn curve_optimum_never_beaten(eta1 in 0.0f64..1.0, leak in 0.0f64..1.0, t_sq in 0.01f64..0.99, w in 0.0f64..FRAC_PI_2) {
        let curve = FilterCurve { eta1, leak, t_sq };
        prop_assert!(curve.eval(w) >= curve.optimum().value - 1e-12);
    }

    #[test]
    fn filter_design_valid(seed in any::<u64>(), n in 2usize..=5, w in 0.0f64..FRAC_PI_2) {
        let mut g = rng(seed);
        let ens = Ensemble::new(random_gram(&mut g, n, false), random_priors(&mut g, n), (0..n).map(|i| if i == 0 { 1 } else { 2 }).collect()).unwrap();
        let d = filter_povms(&ens, w).unwrap();
        let v = verify_povm(&d.povms).unwrap();
        prop_assert!(v.passed, "{v:?}");
        prop_assert!(zero_conditions(&d.povms, &ens).unwrap().max_residual <= 1e-10);
        prop_assert!((failure_probability(&d.povms, &ens) - d.failure).abs() <= 1e-10);
    }
}

#[test]
fn n3_closed_form_matches_scan_and_thresholds() {
    let mut g = rng(2);
    let mut seen = [false; 3];
    for _ in 0..100 {
        let ens = Ensemble::new(random_gram(&mut g, 3, false), random_priors(&mut g, 3), vec![1, 2, 2]).unwrap();
        let r = optimal_filter(&ens).unwrap();
        let (_, scanned) = scan_1d(|w| failure_curve(&ens, w));
        assert!((r.f_opt - scanned).abs() <= 1e-7, "{} vs {}", r.f_opt, scanned);
        let curve = FilterCurve::of_ensemble(&ens);
        let s = (curve.leak / curve.eta1).sqrt();
        let expect = if s > 1.0 {
            Regime::A
        } else if s >= 1.0 - curve.t_sq {
            Regime::B
        } else {
            Regime::C
        };
        assert_eq!(r.regime, expect);
        seen[expect as usize] = true;
    }
    assert!(seen.iter().filter(|&&b| b).count() >= 2);
}

#[test]
fn regime_boundaries_use_interior_form() {
    // S = 1 exactly
    let c = FilterCurve {
        eta1: 0.25,
        leak: 0.25,
        t_sq: 0.5,
    };
    assert_eq!(c.optimum().regime, Regime::B);
    // S = 1 − t²
    let c = FilterCurve {
        eta1: 1.0,
        leak: 0.25,
        t_sq: 0.5,
    };
    assert_eq!(c.optimum().regime, Regime::B);
}

#[test]
fn equal_prior_two_state_is_overlap() {
    let ens = two_state_ensemble(0.5, 0.6, 0.0);
    let r = two_state_optimal(&ens).unwrap();
    assert!((r.f_opt - 0.6).abs() < 1e-12);
    assert_eq!(r.regime, Regime::B);
}
