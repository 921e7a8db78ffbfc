//! Closed-form identities of the special-function, fractional-calculus and
//! resolvent layers, evaluated with the library and compared to tolerances.

use nipfrac::fraccalc::{
    composition_check, power_integral_exact, rl_derivative, rl_integral, GradedMesh, SampledFn,
};
use nipfrac::resolvent::{generator_check, resolvent_apply, resolvent_axiom_check, ResolventParams};
use nipfrac::special::{gamma_fn, mittag_leffler, MLParams};
use nipfrac::state::{SpectralOperator, SpectralState};
use nipfrac::Result;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub suite: String,
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// set when the evaluation itself failed
    pub note: Option<String>,
}

fn row(suite: &str, name: &str, tolerance: f64, eval: impl FnOnce() -> Result<f64>) -> IdentityRow {
    let (error, note) = match eval() {
        Ok(e) => (e, None),
        Err(e) => (f64::INFINITY, Some(e.to_string())),
    };
    IdentityRow {
        suite: suite.into(),
        name: name.into(),
        error,
        tolerance,
        pass: error <= tolerance,
        note,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn power(alpha: f64, n: usize) -> Result<SampledFn> {
    let mesh = GradedMesh::new(0.0, 1.0, n, 2.0)?;
    SampledFn::from_fn(&mesh, (1.0 - alpha).max(0.0), |r| r.powf(alpha - 1.0))
}

const ALPHAS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];
const ORDERS: [f64; 4] = [0.3, 0.7, 1.2, 1.8];

fn power_grid(derivative: bool) -> Result<f64> {
    let mut worst = 0.0f64;
    for alpha in ALPHAS {
        let f = power(alpha, 1024)?;
        for order in ORDERS {
            for t in [0.25, 0.5, 0.9] {
                let (got, want) = if derivative {
                    (rl_derivative(&f, order, t)?, power_integral_exact(alpha, -order, 0.0, t)?)
                } else {
                    (rl_integral(&f, order, t)?, power_integral_exact(alpha, order, 0.0, t)?)
                };
                worst = worst.max(rel(got, want));
            }
        }
    }
    Ok(worst)
}

/// Sine coefficients of v(π − v).
fn parabola(modes: usize) -> SpectralState {
    let c = (1..=modes)
        .map(|g| if g % 2 == 1 { 8.0 / (std::f64::consts::PI * (g * g * g) as f64) } else { 0.0 })
        .collect();
    SpectralState::new(c).expect("finite coefficients")
}

/// Γ(β−1) t^{2−β} R(t) z → z: the error at t = 1e−4, or ∞ if the errors at
/// 1e−2, 1e−3, 1e−4 fail to decrease.
fn limit_axiom(beta: f64) -> Result<f64> {
    let z = parabola(16);
    let p = ResolventParams::dirichlet(beta, 16)?;
    let g = gamma_fn(beta - 1.0)?;
    let mut errs = Vec::with_capacity(3);
    for t in [1e-2f64, 1e-3, 1e-4] {
        let r = resolvent_apply(&p, t, &z)?;
        errs.push((&r.scaled(g * t.powf(2.0 - beta)) - &z).norm());
    }
    Ok(if errs[0] > errs[1] && errs[1] > errs[2] { errs[2] } else { f64::INFINITY })
}

fn functional(commutativity: bool) -> Result<f64> {
    let mut worst = 0.0f64;
    for gamma in [1usize, 2, 5] {
        let op = SpectralOperator::from_eigenvalues(vec![-((gamma * gamma) as f64)])?;
        let p = ResolventParams::new(1.5, op)?;
        for r in [0.3, 0.8] {
            for t in [0.3, 0.8] {
                let c = resolvent_axiom_check(&p, r, t, &SpectralState::unit(1, 1.0))?;
                worst = worst.max(if commutativity { c.commutativity } else { c.functional });
            }
        }
    }
    Ok(worst)
}

pub fn run_all() -> Vec<IdentityRow> {
    let mut rows = vec![
        row("special", "E_{1,1}(w) = exp(w) on [-5, 5]", 1e-10, || {
            let p = MLParams::new(1.0, 1.0)?;
            let mut worst = 0.0f64;
            for i in 0..50 {
                let w = -5.0 + 10.0 * i as f64 / 49.0;
                worst = worst.max(rel(mittag_leffler(p, w)?, w.exp()));
            }
            Ok(worst)
        }),
        row("special", "E_{b,b}(0) = 1/Gamma(b), b = 1.1, 1.5, 1.9", 1e-14, || {
            let mut worst = 0.0f64;
            for b in [1.1, 1.5, 1.9] {
                let v = mittag_leffler(MLParams::new(b, b)?, 0.0)?;
                worst = worst.max(rel(v, 1.0 / gamma_fn(b)?));
            }
            Ok(worst)
        }),
        row("fraccalc", "I^q (t-t0)^(a-1) power rule, n = 1024", 1e-4, || power_grid(false)),
        row("fraccalc", "D^q (t-t0)^(a-1) power rule, n = 1024", 1e-4, || power_grid(true)),
        row("fraccalc", "I^b D^b f = f - initial terms, f = t^(b-1)", 1e-6, || {
            let beta = 1.5;
            let mesh = GradedMesh::new(0.0, 1.0, 256, 2.0)?;
            let f = SampledFn::from_fn(&mesh, 2.0 - beta, |r| r.powf(beta - 1.0))?;
            Ok(composition_check(&f, beta)?.max_defect)
        }),
    ];
    for beta in [1.3, 1.5, 1.8] {
        rows.push(row(
            "resolvent",
            &format!("Gamma(b-1) t^(2-b) R(t) z -> z, b = {beta}"),
            1e-3,
            || limit_axiom(beta),
        ));
    }
    rows.push(row("resolvent", "functional equation, r, t in {0.3, 0.8}", 1e-6, || {
        functional(false)
    }));
    rows.push(row("resolvent", "R(r) R(t) = R(t) R(r)", 0.0, || functional(true)));
    rows.push(row("resolvent", "R(t) = t^(b-2)/Gamma(b-1) + A I^b R(t)", 1e-6, || {
        let p = ResolventParams::dirichlet(1.6, 16)?;
        let z = parabola(16);
        let mut worst = 0.0f64;
        for t in [0.01, 0.2, 0.7, 1.0] {
            worst = worst.max(generator_check(&p, t, &z)?);
        }
        Ok(worst)
    }));
    rows
}

/// Fixed-width pass/fail table.
pub fn table(rows: &[IdentityRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = format!(
        "{:<10} {:<width$} {:>12} {:>10}  result\n",
        "suite", "identity", "error", "tolerance"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<10} {:<width$} {:>12.3e} {:>10.1e}  {}\n",
            r.suite,
            r.name,
            r.error,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    s
}
