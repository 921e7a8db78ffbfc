//! The Riemann-Liouville fractional resolvent of a diagonal operator.
//!
//! For eigenvalue λ the resolvent acts on a mode by
//! `ρ(t) = t^{β−2} E_{β,β−1}(λ t^β)`. Term-by-term integration of the series
//! gives the closed forms used throughout:
//!
//! * `∫_0^t ρ = t^{β−1} E_{β,β}(λ t^β)`, which is also the kernel `K(s)` of the
//!   double integral,
//! * `I^β ρ(t) = t^{2β−2} E_{β,2β−1}(λ t^β)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::SingularRule;
use crate::special::{gamma_fn, mittag_leffler, rgamma, MLParams, MlTable};
use crate::state::{SpectralOperator, SpectralState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventParams {
    beta: f64,
    op: SpectralOperator,
}

impl ResolventParams {
    pub fn new(beta: f64, op: SpectralOperator) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::domain(format!("beta = {beta} must lie in (1, 2)")));
        }
        Ok(ResolventParams { beta, op })
    }

    /// Dirichlet Laplacian on [0, π] with `modes` modes.
    pub fn dirichlet(beta: f64, modes: usize) -> Result<Self> {
        ResolventParams::new(beta, SpectralOperator::dirichlet(modes)?)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn op(&self) -> &SpectralOperator {
        &self.op
    }

    pub fn modes(&self) -> usize {
        self.op.modes()
    }

    fn ml(&self, beta_p: f64) -> MLParams {
        MLParams {
            alpha: self.beta,
            beta_p,
        }
    }

    fn check(&self, t: f64, w: &SpectralState) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("the resolvent is defined for t > 0, got {t}")));
        }
        if w.modes() != self.modes() {
            return Err(Error::domain(format!(
                "state has {} modes, operator has {}",
                w.modes(),
                self.modes()
            )));
        }
        Ok(())
    }

    /// Per-mode factors `t^{shift} E_{β,β'}(λ t^β)`.
    fn factors(&self, beta_p: f64, shift: f64, t: f64) -> Result<Vec<f64>> {
        let p = self.ml(beta_p);
        let tb = t.powf(self.beta);
        let pre = t.powf(shift);
        self.op
            .eigenvalues()
            .iter()
            .map(|&l| Ok(pre * mittag_leffler(p, l * tb)?))
            .collect()
    }

    /// Coefficients of ρ_γ(t) = t^{β−2} E_{β,β−1}(λ_γ t^β).
    pub fn resolvent_factors(&self, t: f64) -> Result<Vec<f64>> {
        self.factors(self.beta - 1.0, self.beta - 2.0, t)
    }

    /// Coefficients of ∫_0^t ρ_γ = t^{β−1} E_{β,β}(λ_γ t^β).
    pub fn integrated_factors(&self, t: f64) -> Result<Vec<f64>> {
        self.factors(self.beta, self.beta - 1.0, t)
    }

    /// Coefficients of I^β ρ_γ(t) = t^{2β−2} E_{β,2β−1}(λ_γ t^β).
    pub fn fractional_integral_factors(&self, t: f64) -> Result<Vec<f64>> {
        self.factors(2.0 * self.beta - 1.0, 2.0 * self.beta - 2.0, t)
    }
}

/// R_β(t) w.
pub fn resolvent_apply(p: &ResolventParams, t: f64, w: &SpectralState) -> Result<SpectralState> {
    p.check(t, w)?;
    Ok(w.hadamard(&p.resolvent_factors(t)?))
}

/// ∫_0^t R_β(r) w dr.
pub fn integrated_resolvent(p: &ResolventParams, t: f64, w: &SpectralState) -> Result<SpectralState> {
    p.check(t, w)?;
    Ok(w.hadamard(&p.integrated_factors(t)?))
}

/// I^β applied to r ↦ R_β(r) w, evaluated at t.
pub fn resolvent_fractional_integral(
    p: &ResolventParams,
    t: f64,
    w: &SpectralState,
) -> Result<SpectralState> {
    p.check(t, w)?;
    Ok(w.hadamard(&p.fractional_integral_factors(t)?))
}

/// E_{β,β'}(λ_γ s^β) for every mode and 0 ≤ s ≤ s_max, tabulated.
#[derive(Debug, Clone)]
pub struct ModeKernel {
    beta: f64,
    eigenvalues: Vec<f64>,
    tables: Vec<Option<MlTable>>,
    at_zero: f64,
}

impl ModeKernel {
    pub fn new(beta: f64, beta_p: f64, op: &SpectralOperator, s_max: f64) -> Result<Self> {
        let p = MLParams::new(beta, beta_p)?;
        let sb = s_max.max(0.0).powf(beta);
        let tables = op
            .eigenvalues()
            .iter()
            .map(|&l| {
                if l == 0.0 {
                    Ok(None)
                } else {
                    MlTable::new(p, -l * sb * (1.0 + 1e-12)).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        Ok(ModeKernel {
            beta,
            eigenvalues: op.eigenvalues().to_vec(),
            tables,
            at_zero: rgamma(beta_p),
        })
    }

    pub fn modes(&self) -> usize {
        self.tables.len()
    }

    /// E_{β,β'}(λ_mode s^β).
    pub fn eval(&self, mode: usize, s: f64) -> f64 {
        match &self.tables[mode] {
            None => self.at_zero,
            Some(t) => {
                if s <= 0.0 {
                    self.at_zero
                } else {
                    t.eval_neg(-self.eigenvalues[mode] * s.powf(self.beta))
                }
            }
        }
    }
}

/// A spectral-valued function sampled at times to the right of `t0`, with
/// known blow-up order `singular_exponent` at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSamples {
    pub t0: f64,
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    pub singular_exponent: f64,
}

impl StateSamples {
    pub fn new(
        t0: f64,
        times: Vec<f64>,
        states: Vec<SpectralState>,
        singular_exponent: f64,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::domain("empty sample mesh"));
        }
        if times.len() != states.len() {
            return Err(Error::domain("time and state counts differ"));
        }
        if times[0] <= t0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("sample times must increase strictly from t0"));
        }
        let modes = states[0].modes();
        if states.iter().any(|s| s.modes() != modes) {
            return Err(Error::domain("samples have differing mode counts"));
        }
        if !(0.0..1.0).contains(&singular_exponent) {
            return Err(Error::domain("singular exponent must lie in [0, 1)"));
        }
        Ok(StateSamples {
            t0,
            times,
            states,
            singular_exponent,
        })
    }
}

/// ∫_u^t K_γ(t−r) g_γ(r) dr per mode, with K(s) = s^{β−1} E_{β,β}(λ s^β).
///
/// The weighted samples `(r−u)^σ g(r) E_{β,β}(λ(t−r)^β)` are interpolated
/// piecewise-linearly and integrated against `(t−r)^{β−1}(r−u)^{−σ}`
/// exactly.
pub fn double_convolution(
    p: &ResolventParams,
    u: f64,
    t: f64,
    g: &StateSamples,
) -> Result<SpectralState> {
    if g.times.len() < 2 {
        return Err(Error::domain("the source needs at least two samples"));
    }
    if g.t0 != u {
        return Err(Error::domain("source samples must start at the lower limit u"));
    }
    let last = *g.times.last().expect("non-empty");
    if !(t > u && t <= last) {
        return Err(Error::domain(format!("t = {t} outside ({u}, {last}]")));
    }
    let modes = p.modes();
    if g.states[0].modes() != modes {
        return Err(Error::domain("source and operator mode counts differ"));
    }
    let sigma = g.singular_exponent;
    let weight = |i: usize| (g.times[i] - u).powf(sigma);
    let k = g.times.partition_point(|&x| x <= t);
    // points up to t; the value at an inserted t is interpolated from its cell
    let mut pts: Vec<f64> = g.times[..k].to_vec();
    let mut ys: Vec<Vec<f64>> = (0..k)
        .map(|i| g.states[i].coeffs().iter().map(|c| c * weight(i)).collect())
        .collect();
    if k == 0 || pts[k - 1] < t {
        let c = k.saturating_sub(1).min(g.times.len() - 2);
        let (x0, x1) = (g.times[c], g.times[c + 1]);
        let th = (t - x0) / (x1 - x0);
        let (w0, w1) = (weight(c), weight(c + 1));
        let y: Vec<f64> = (0..modes)
            .map(|m| {
                let a = g.states[c][m] * w0;
                let b = g.states[c + 1][m] * w1;
                a + (b - a) * th
            })
            .collect();
        if k == 0 {
            // t in the first cell: keep the line through the first two samples
            pts = vec![t, x1];
            ys = vec![y, (0..modes).map(|m| g.states[1][m] * w1).collect()];
            let kernel = ModeKernel::new(p.beta, p.beta, &p.op, t - u)?;
            let rule = SingularRule::new(p.beta - 1.0, -sigma);
            let mut out = vec![0.0; modes];
            for (m, o) in out.iter_mut().enumerate() {
                let (ya, yb) = (ys[0][m], ys[1][m]);
                let line = |r: f64| {
                    (ya + (yb - ya) * (r - pts[0]) / (pts[1] - pts[0])) * kernel.eval(m, t - r)
                };
                *o = rule.integrate(u, t, u, t, &line);
            }
            return SpectralState::new(out);
        }
        pts.push(t);
        ys.push(y);
    }
    let rule = SingularRule::new(p.beta - 1.0, -sigma);
    let w = rule.interpolant_weights(u, t, &pts);
    let kernel = ModeKernel::new(p.beta, p.beta, &p.op, t - u)?;
    let mut out = vec![0.0; modes];
    for (l, (&wl, &r)) in w.iter().zip(&pts).enumerate() {
        for (m, o) in out.iter_mut().enumerate() {
            *o += wl * ys[l][m] * kernel.eval(m, t - r);
        }
    }
    SpectralState::new(out)
}

/// max over the grid and the modes of |t^{2−β} ρ_γ(t)| = |E_{β,β−1}(λ_γ t^β)|.
#[allow(non_snake_case)]
pub fn estimate_lambda_R(p: &ResolventParams, t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::domain("empty grid"));
    }
    let ml = p.ml(p.beta - 1.0);
    let mut best = 0.0f64;
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::domain(format!("grid point {t} is not positive")));
        }
        let tb = t.powf(p.beta);
        for &l in p.op.eigenvalues() {
            best = best.max(mittag_leffler(ml, l * tb)?.abs());
        }
    }
    Ok(best)
}

/// Defects of the resolvent identities at (r, t) for the state w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    /// max over modes of
    /// |R(r) I^β R(t) − I^β R(r) R(t) − (r^{β−2} I^β R(t) − t^{β−2} I^β R(r))/Γ(β−1)| w.
    pub functional: f64,
    /// max over modes of |R(r) R(t) w − R(t) R(r) w|.
    pub commutativity: f64,
}

impl AxiomCheck {
    pub fn max(&self) -> f64 {
        self.functional.max(self.commutativity)
    }
}

pub fn resolvent_axiom_check(
    p: &ResolventParams,
    r: f64,
    t: f64,
    w: &SpectralState,
) -> Result<AxiomCheck> {
    p.check(r, w)?;
    p.check(t, w)?;
    let rho_r = p.resolvent_factors(r)?;
    let rho_t = p.resolvent_factors(t)?;
    let int_r = p.fractional_integral_factors(r)?;
    let int_t = p.fractional_integral_factors(t)?;
    let g = gamma_fn(p.beta - 1.0)?;
    let (ar, at) = (r.powf(p.beta - 2.0) / g, t.powf(p.beta - 2.0) / g);
    let mut functional = 0.0f64;
    let mut commutativity = 0.0f64;
    for m in 0..p.modes() {
        let lhs = (rho_r[m] * int_t[m] - int_r[m] * rho_t[m]) * w[m];
        let rhs = (ar * int_t[m] - at * int_r[m]) * w[m];
        functional = functional.max((lhs - rhs).abs());
        let a = rho_r[m] * (rho_t[m] * w[m]);
        let b = rho_t[m] * (rho_r[m] * w[m]);
        commutativity = commutativity.max((a - b).abs());
    }
    Ok(AxiomCheck {
        functional,
        commutativity,
    })
}

/// max over modes of |R(t) w − t^{β−2} w/Γ(β−1) − A I^β R(t) w|.
pub fn generator_check(p: &ResolventParams, t: f64, w: &SpectralState) -> Result<f64> {
    p.check(t, w)?;
    let rho = p.resolvent_factors(t)?;
    let int = p.fractional_integral_factors(t)?;
    let lead = t.powf(p.beta - 2.0) * rgamma(p.beta - 1.0);
    let mut worst = 0.0f64;
    for (m, &l) in p.op.eigenvalues().iter().enumerate() {
        let d = (rho[m] - lead - l * int[m]) * w[m];
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(ResolventParams::dirichlet(1.0, 4).is_err());
        assert!(ResolventParams::dirichlet(2.0, 4).is_err());
        let p = ResolventParams::dirichlet(1.5, 4).unwrap();
        let w = SpectralState::zeros(4);
        assert!(resolvent_apply(&p, 0.0, &w).is_err());
        assert!(resolvent_apply(&p, -1.0, &w).is_err());
        assert!(resolvent_apply(&p, 1.0, &SpectralState::zeros(3)).is_err());
    }

    #[test]
    fn kernel_table_matches_direct() {
        let op = SpectralOperator::dirichlet(8).unwrap();
        let k = ModeKernel::new(1.6, 1.6, &op, 0.7).unwrap();
        let p = MLParams::new(1.6, 1.6).unwrap();
        for m in 0..8 {
            for s in [0.0, 0.01, 0.3, 0.7] {
                let l = -(((m + 1) * (m + 1)) as f64);
                let d = mittag_leffler(p, l * f64::powf(s, 1.6)).unwrap();
                assert!((k.eval(m, s) - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_estimate_is_monotone_under_refinement() {
        let p = ResolventParams::dirichlet(1.7, 8).unwrap();
        let coarse: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let fine: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        assert!(estimate_lambda_R(&p, &fine).unwrap() >= estimate_lambda_R(&p, &coarse).unwrap());
    }
}
