// oracle values keep all their digits
#![allow(clippy::excessive_precision)]

use nipfrac::special::{
    gamma_fn, mittag_leffler, mittag_leffler_series, MLParams, MlTable, DEFAULT_TERM_CAP,
};
use proptest::prelude::*;

fn ml(a: f64, b: f64, w: f64) -> f64 {
    mittag_leffler(MLParams::new(a, b).unwrap(), w).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// 200-digit direct summation, tests/oracles/ml_oracle.py
const ML_ORACLE: &[(f64, f64, f64, f64)] = &[
    (1.5, 0.5, -2.0, -0.51580780208558239646),
    (1.5, 1.5, -2.0, 0.41340965905490819621),
    (1.5, 0.5, -0.3, 0.29017334367423436796),
    (1.1, 1.1, -7.5, -0.0040928666510963998199),
    (1.1, 0.1, -20.0, 0.00082881267023538580326),
    (1.3, 0.3, -3.0, -0.42225939151909899565),
    (1.3, 1.3, -49.0, -0.00013468998708375502995),
    (1.5, 1.5, -10.0, -0.063386339712500377276),
    (1.5, 0.5, -50.0, 0.005806096255203032174),
    (1.8, 0.8, -50.0, -0.34017607446723885369),
    (1.8, 1.8, -12.25, -0.15326966856737377177),
    (1.9, 0.9, -100.0, 0.21517413869838589984),
    (1.9, 1.9, -400.0, -0.0088207797954866032017),
    (1.5, 0.5, -1000.0, 1.0577638703505477005e-6),
    (1.5, 1.5, -1000.0, -4.2312553090068829732e-7),
    (1.2, 1.2, -30.0, -0.00026805637764968556231),
    (1.5, 2.0, -4.0, 0.2839799579675376488),
    (1.5, 3.5, -1.0, 0.26251775209810528582),
    (1.5, 3.5, -6.0, 0.14211554138083360194),
    (0.6, 1.0, -8.0, 0.058609742636332040514),
    (1.5, 1.5, 5.0, 7.2468424375621484878),
    (2.0, 1.0, 9.0, 10.067661995777765842),
];

const GAMMA_ORACLE: &[(f64, f64)] = &[
    (0.1, 9.5135076986687312858),
    (0.37, 2.4035500200786532783),
    (1.5, 0.88622692545275801365),
    (2.5, 1.3293403881791370205),
    (7.25, 1155.3810139199896872),
    (13.7, 2861595499.066014607),
    (27.3, 1.0797796663270246237e+27),
    (49.9, 4.1180110342530352191e+62),
    (-0.5, -3.5449077018110320546),
    (-2.3, -1.4471073942559181166),
];

#[test]
fn exponential_special_case() {
    assert!(rel(ml(1.0, 1.0, 1.0), std::f64::consts::E) < 1e-14);
}

#[test]
fn zero_argument_is_reciprocal_gamma() {
    for beta in [1.1, 1.5, 1.9] {
        let want = 1.0 / gamma_fn(beta).unwrap();
        assert_eq!(ml(beta, beta, 0.0), want);
    }
}

#[test]
fn frozen_high_precision_values() {
    for &(a, b, w, want) in ML_ORACLE {
        let got = ml(a, b, w);
        let tol = if w.abs() <= 50.0 { 1e-10 } else { 1e-6 };
        assert!(rel(got, want) < tol, "E_({a},{b})({w}) = {got}, want {want}");
    }
}

#[test]
fn frozen_gamma_values() {
    for &(x, want) in GAMMA_ORACLE {
        let got = gamma_fn(x).unwrap();
        assert!(rel(got, want) < 1e-12, "Γ({x}) = {got}, want {want}");
    }
    // Γ(3.5) from the recurrence on Γ(1/2)
    let g = 2.5 * 1.5 * 0.5 * std::f64::consts::PI.sqrt();
    assert!(rel(gamma_fn(3.5).unwrap(), g) < 1e-13);
}

#[test]
fn non_finite_arguments_are_rejected() {
    let p = MLParams::new(1.5, 1.5).unwrap();
    assert!(mittag_leffler(p, f64::NAN).is_err());
    assert!(mittag_leffler(p, f64::INFINITY).is_err());
    assert!(MLParams::new(0.0, 1.0).is_err());
    assert!(MLParams::new(1.0, f64::NAN).is_err());
}

#[test]
fn truncation_plateau() {
    for &(a, b, w) in &[(1.5, 0.5, -0.9), (1.2, 1.2, 0.8), (2.0, 1.0, 9.0), (1.5, 1.5, 5.0)] {
        let p = MLParams::new(a, b).unwrap();
        let base = mittag_leffler_series(p, w, DEFAULT_TERM_CAP).unwrap();
        let doubled = mittag_leffler_series(p, w, 2 * DEFAULT_TERM_CAP).unwrap();
        assert!(rel(doubled, base) < 1e-12);
    }
}

#[test]
fn table_tracks_direct_evaluation() {
    for (a, b) in [(1.5, 0.5), (1.5, 1.5), (1.8, 0.8), (1.8, 1.8), (1.2, 0.2)] {
        let p = MLParams::new(a, b).unwrap();
        let table = MlTable::new(p, 600.0).unwrap();
        for i in 0..=300 {
            let x = 600.0 * (i as f64 / 300.0).powi(3) + 0.013 * i as f64 % 1.0;
            let x = x.min(600.0);
            let d = mittag_leffler(p, -x).unwrap();
            assert!((table.eval_neg(x) - d).abs() < 1e-12, "({a},{b}) at {x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_exp(w in -5.0f64..5.0) {
        prop_assert!(rel(ml(1.0, 1.0, w), w.exp()) <= 1e-10);
    }

    #[test]
    fn matches_cosh_sqrt(w in 0.0f64..10.0) {
        prop_assert!(rel(ml(2.0, 1.0, w), w.sqrt().cosh()) <= 1e-10);
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..20.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!(rel(lhs, rhs) <= 1e-12);
    }

    // E_{α,β}(w) = 1/Γ(β) + w E_{α,α+β}(w) ties the series and the
    // inversion regimes together.
    #[test]
    fn shift_identity(a in 1.05f64..1.95, w in -80.0f64..-1.5) {
        let lhs = ml(a, a - 1.0, w);
        let rhs = 1.0 / gamma_fn(a - 1.0).unwrap() + w * ml(a, 2.0 * a - 1.0, w);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }
}
