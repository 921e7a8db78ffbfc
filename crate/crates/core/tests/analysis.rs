use nipfrac::analysis::{
    assumption_checklist, contraction_constant, contraction_from_inputs, ContractionInputs, Status,
};
use nipfrac::problem::{example_problem, Impulse, Nonlinearity, Partition, ProblemDocument, ProblemSpec};
use nipfrac::special::gamma_fn;
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
#[allow(non_snake_case)]
struct Case {
    beta: f64,
    u: Vec<f64>,
    t: Vec<f64>,
    lam_R: f64,
    lam_h: f64,
    lam_psi: Vec<f64>,
    c0: f64,
    rows: Vec<[f64; 5]>,
    c: f64,
}

fn cases() -> Vec<Case> {
    serde_json::from_str(include_str!("data/contraction_cases.json")).unwrap()
}

fn inputs(c: &Case) -> ContractionInputs {
    ContractionInputs {
        beta: c.beta,
        partition: Partition::new(c.u.clone(), c.t.clone()).unwrap(),
        lambda_R: c.lam_R,
        lambda_h: c.lam_h,
        lambda_psi: c.lam_psi.clone(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

#[test]
fn scripted_oracle_cases() {
    let cases = cases();
    assert_eq!(cases.len(), 20);
    for (i, case) in cases.iter().enumerate() {
        let r = contraction_from_inputs(&inputs(case)).unwrap();
        assert!(rel(r.c, case.c) <= 1e-12, "case {i}: {} vs {}", r.c, case.c);
        assert!(rel(r.c0, case.c0) <= 1e-12, "case {i}");
        assert_eq!(r.intervals.len(), case.rows.len());
        for (row, want) in r.intervals.iter().zip(&case.rows) {
            for (got, w) in row.terms().iter().zip(want) {
                assert!(rel(*got, *w) <= 1e-12, "case {i} j={}: {got} vs {w}", row.j);
            }
            assert!((row.c_j - row.terms().iter().sum::<f64>()).abs() <= 1e-15 * row.c_j);
        }
    }
}

fn doc(beta: f64, partition: Partition, h: Nonlinearity, impulses: Vec<Impulse>) -> ProblemSpec {
    let m = partition.m();
    ProblemSpec::from_document(&ProblemDocument {
        beta,
        partition,
        modes: 2,
        z0: vec![],
        ztilde: vec![vec![]; m + 1],
        h,
        impulses,
        q: None,
    })
    .unwrap()
}

#[test]
fn single_interval_constants() {
    let p = Partition::new(vec![0.0], vec![0.7]).unwrap();
    let zero = doc(1.5, p.clone(), Nonlinearity::Zero {}, vec![]);
    let r = contraction_constant(&zero, 0.9).unwrap();
    assert_eq!(r.c, 0.0);
    assert!(r.verdict);

    let lin = doc(1.5, p, Nonlinearity::Linear { lambda: 0.4 }, vec![]);
    let r = contraction_constant(&lin, 0.9).unwrap();
    let want = 0.9 * 0.4 * gamma_fn(0.5).unwrap().powi(2) * 0.7f64.powf(1.5) / gamma_fn(2.0).unwrap();
    assert!(rel(r.c, want) < 1e-14);
    assert!(r.intervals.is_empty());
}

#[test]
fn example_passes_for_small_delta() {
    let spec = example_problem(0.5, 4).unwrap();
    let report = assumption_checklist(&spec, 1.0 / gamma_fn(0.8).unwrap()).unwrap();
    assert!(report.all_pass, "{report:?}");
    assert_eq!(report.item("A1").unwrap().status, Status::Skipped);
    let c = report.contraction.c;
    assert!(c > 0.2 && c < 0.8, "{c}");
}

#[test]
fn out_of_range_impulse_constant_is_flagged() {
    let p = Partition::new(vec![0.0, 0.5], vec![0.2, 1.0]).unwrap();
    let spec = doc(
        1.5,
        p,
        Nonlinearity::Sine { epsilon: 0.1 },
        vec![Impulse::Linear { lambda: 1.5 }],
    );
    let r = assumption_checklist(&spec, 1.0).unwrap();
    assert!(!r.all_pass);
    assert_eq!(r.item("A3").unwrap().status, Status::Fail);
    assert_eq!(r.item("A4").unwrap().status, Status::Fail);
    assert_eq!(r.item("A2").unwrap().status, Status::Pass);
}

#[test]
fn q_diagnostic() {
    let mut d = example_problem(0.5, 2).unwrap().to_document();
    d.q = Some(4.0); // bound 1/(2−1.8) = 5
    let r = assumption_checklist(&ProblemSpec::from_document(&d).unwrap(), 1.0).unwrap();
    assert_eq!(r.item("A1").unwrap().status, Status::Pass);
    d.q = Some(6.0);
    let r = assumption_checklist(&ProblemSpec::from_document(&d).unwrap(), 1.0).unwrap();
    assert_eq!(r.item("A1").unwrap().status, Status::Fail);
}

#[test]
fn zero_problem_passes_everything() {
    let p = Partition::new(vec![0.0], vec![1.0]).unwrap();
    let spec = doc(1.5, p, Nonlinearity::Zero {}, vec![]);
    let r = assumption_checklist(&spec, 1.0).unwrap();
    assert!(r.all_pass, "{r:?}");
    assert_eq!(r.contraction.c, 0.0);
}

#[test]
fn partition_term_survives_zero_constants() {
    // with λ_h = λ_ψ = 0 the history term still depends on the timetable
    let p = Partition::new(vec![0.0, 0.4], vec![0.2, 1.0]).unwrap();
    let spec = doc(1.5, p, Nonlinearity::Zero {}, vec![Impulse::Zero {}]);
    let r = contraction_constant(&spec, 1.0).unwrap();
    let row = &r.intervals[0];
    assert_eq!([row.term1, row.term2, row.term4, row.term5], [0.0; 4]);
    assert!(row.term4.is_sign_positive());
    let want = 1.0 / (0.5 * gamma_fn(0.5).unwrap()) * (0.2f64 / 0.2).powf(0.5);
    assert!(rel(r.c, want) < 1e-14);
}

fn arb_inputs() -> impl Strategy<Value = ContractionInputs> {
    (1.05f64..1.95, 0usize..5, 0.5f64..3.0, 0.1f64..2.0, 0.0f64..2.0, any::<u64>()).prop_map(
        |(beta, m, a, lr, lh, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // well separated cuts: jittered uniform spacing
            let n = 2 * m + 1;
            let pts: Vec<f64> = (1..=n)
                .map(|i| a * (i as f64 - rng.gen_range(0.1..0.9)) / n as f64)
                .collect();
            let mut u = vec![0.0];
            let mut t = vec![];
            for (i, x) in pts.iter().enumerate() {
                if i % 2 == 0 {
                    t.push(*x);
                } else {
                    u.push(*x);
                }
            }
            *t.last_mut().unwrap() = a;
            ContractionInputs {
                beta,
                partition: Partition::new(u, t).unwrap(),
                lambda_R: lr,
                lambda_h: lh,
                lambda_psi: (0..m).map(|_| rng.gen_range(0.0..1.0)).collect(),
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monotone_in_every_constant(inp in arb_inputs(), bump in 0.01f64..1.0, which in 0usize..8) {
        let base = contraction_from_inputs(&inp).unwrap();
        let mut up = inp.clone();
        match which {
            0 => up.lambda_h += bump,
            1 => up.lambda_R += bump,
            k => {
                if !up.lambda_psi.is_empty() {
                    let i = k % up.lambda_psi.len();
                    up.lambda_psi[i] += bump;
                }
            }
        }
        let r = contraction_from_inputs(&up).unwrap();
        prop_assert!(r.c >= base.c);
        for (a, b) in r.intervals.iter().zip(&base.intervals) {
            for (x, y) in a.terms().iter().zip(b.terms()) {
                prop_assert!(*x >= y);
            }
        }
    }

    #[test]
    fn doubling_lambda_h_moves_only_term2(inp in arb_inputs()) {
        let base = contraction_from_inputs(&inp).unwrap();
        let mut up = inp.clone();
        up.lambda_h *= 2.0;
        let r = contraction_from_inputs(&up).unwrap();
        prop_assert!((r.c0 - 2.0 * base.c0).abs() <= 1e-15 * r.c0);
        for (a, b) in r.intervals.iter().zip(&base.intervals) {
            prop_assert_eq!(a.term1.to_bits(), b.term1.to_bits());
            prop_assert_eq!(a.term3.to_bits(), b.term3.to_bits());
            prop_assert_eq!(a.term4.to_bits(), b.term4.to_bits());
            prop_assert_eq!(a.term5.to_bits(), b.term5.to_bits());
            prop_assert!((a.term2 - 2.0 * b.term2).abs() <= 1e-15 * a.term2);
            prop_assert!(a.terms().iter().all(|x| *x >= 0.0));
        }
    }
}
