//! Two-parameter Mittag-Leffler function E_{α,β}(w) = Σ wⁱ / Γ(αi + β) on the
//! real line.
//!
//! Regimes:
//! * `w ≥ 0`, or `|w| ≤ 1`: the defining series with compensated summation.
//! * `w < −1`, `0 < α < 2`, `α ≠ 1`: Laplace inversion collapsed onto the
//!   branch cut of `s^{α−β}`, plus the residues at the poles `s^α = w`.
//! * other negative arguments: series up to |w| = 50, algebraic asymptotic
//!   expansion beyond.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::{ln_gamma_unchecked, rgamma};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_gk;

/// Parameters (α, β') of E_{α,β'}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub alpha: f64,
    pub beta_p: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta_p: f64) -> Result<Self> {
        let p = MLParams { alpha, beta_p };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !self.beta_p.is_finite() {
            return Err(Error::domain("second Mittag-Leffler parameter must be finite"));
        }
        Ok(())
    }
}

pub const DEFAULT_TERM_CAP: usize = 10_000;
const SERIES_REL_STOP: f64 = 1e-16;
const SERIES_NEGATIVE_LIMIT: f64 = 1.0;
const ASYMPTOTIC_THRESHOLD: f64 = 50.0;
const ASYMPTOTIC_TERMS: usize = 10;

/// E_{α,β'}(w).
pub fn mittag_leffler(p: MLParams, w: f64) -> Result<f64> {
    p.validate()?;
    if !w.is_finite() {
        return Err(Error::domain(format!("Mittag-Leffler argument {w} is not finite")));
    }
    if w == 0.0 {
        return Ok(rgamma(p.beta_p));
    }
    if w > 0.0 || w >= -SERIES_NEGATIVE_LIMIT {
        return mittag_leffler_series(p, w, DEFAULT_TERM_CAP);
    }
    if p.alpha < 2.0 && p.alpha != 1.0 {
        return Ok(negative_by_inversion(p, -w));
    }
    if w >= -ASYMPTOTIC_THRESHOLD {
        mittag_leffler_series(p, w, DEFAULT_TERM_CAP)
    } else {
        Ok(asymptotic_negative(p, w))
    }
}

/// Direct summation of the defining series with at most `cap` terms.
///
/// Terms are accumulated with Neumaier compensation; the loop stops once the
/// terms have passed their peak and fall below 1e−16 of the running sum.
pub fn mittag_leffler_series(p: MLParams, w: f64, cap: usize) -> Result<f64> {
    p.validate()?;
    if !w.is_finite() {
        return Err(Error::domain(format!("Mittag-Leffler argument {w} is not finite")));
    }
    if w == 0.0 {
        return Ok(rgamma(p.beta_p));
    }
    let lw = w.abs().ln();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut prev_mag = f64::INFINITY;
    for k in 0..cap {
        let arg = p.alpha * k as f64 + p.beta_p;
        let term = series_term(w, lw, k, arg);
        if !term.is_finite() {
            return Err(Error::Accuracy {
                message: format!("series term {k} overflowed at w = {w}"),
                best: sum + comp,
            });
        }
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        let mag = term.abs();
        let total = (sum + comp).abs();
        let past_peak = mag <= prev_mag && arg > 1.0;
        if k > 2 && past_peak && mag <= SERIES_REL_STOP * total {
            return Ok(sum + comp);
        }
        if k > 2 && past_peak && total == 0.0 && mag == 0.0 {
            return Ok(0.0);
        }
        prev_mag = mag;
    }
    Err(Error::Accuracy {
        message: format!("series did not converge within {cap} terms at w = {w}"),
        best: sum + comp,
    })
}

fn series_term(w: f64, lw: f64, k: usize, arg: f64) -> f64 {
    let kf = k as f64;
    if arg <= 0.0 && arg == arg.floor() {
        return 0.0;
    }
    if arg < 160.0 && kf * lw < 650.0 {
        w.powi(k as i32) * rgamma(arg)
    } else {
        let sign_w = if w < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        let sign_g = if arg > 0.0 {
            1.0
        } else {
            // sign of Γ on the negative axis alternates between poles
            if (arg.floor() as i64).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        };
        sign_w * sign_g * (kf * lw - ln_gamma_unchecked(arg)).exp()
    }
}

/// Lowers β' with E_{α,β'}(w) = (E_{α,β'−α}(w) − 1/Γ(β'−α)) / w until the
/// cut integrand r^{α−β'} is comfortably integrable at the origin.
fn negative_by_inversion(p: MLParams, x: f64) -> f64 {
    if p.beta_p - p.alpha > 0.9 {
        let lower = MLParams {
            alpha: p.alpha,
            beta_p: p.beta_p - p.alpha,
        };
        return (negative_by_inversion(lower, x) - rgamma(lower.beta_p)) / (-x);
    }
    branch_cut_negative(p, x)
}

/// E_{α,β'}(−x) for x > 0 and 0 < α < 2, α ≠ 1, from the inverse Laplace
/// transform `s^{α−β'} / (s^α + x)`. The Hankel contour is collapsed onto the
/// negative real axis; poles off the cut contribute (1/α) s*^{1−β'} e^{s*}.
fn branch_cut_negative(p: MLParams, x: f64) -> f64 {
    let (a, b) = (p.alpha, p.beta_p);
    let z = -x;
    let sb = (PI * b).sin();
    let sab = (PI * (a - b)).sin();
    let ca = (PI * a).cos();
    let peak = x.powf(1.0 / a);
    let integrand = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let ra = r.powf(a);
        let den = ra * ra - 2.0 * z * ra * ca + z * z;
        (-r).exp() * r.powf(a - b) * (ra * sb + z * sab) / den
    };
    const R_MAX: f64 = 80.0;
    let mut breaks = vec![0.0];
    for cand in [0.5 * peak, peak, 2.0 * peak] {
        if cand > 1e-12 && cand < R_MAX {
            breaks.push(cand);
        }
    }
    if *breaks.last().unwrap() < 1.0 {
        breaks.push(1.0);
    }
    breaks.push(R_MAX);
    let (cut, _) = adaptive_gk(integrand, &breaks, 1e-17, 1e-14, 4000);
    let mut total = cut / PI;
    if a > 1.0 {
        // poles at s = x^{1/α} e^{±iπ/α}
        let theta = PI / a;
        let re = peak * theta.cos();
        let im = peak * theta.sin();
        // s^{1−β'} e^{s}: modulus and phase
        let modulus = peak.powf(1.0 - b) * re.exp();
        let phase = (1.0 - b) * theta + im;
        total += 2.0 * modulus * phase.cos() / a;
    }
    total
}

/// E_{α,β'}(w) ≈ −Σ_{k=1..10} w^{−k} / Γ(β' − αk), w → −∞.
fn asymptotic_negative(p: MLParams, w: f64) -> f64 {
    let mut s = 0.0;
    for k in 1..=ASYMPTOTIC_TERMS {
        s -= w.powi(-(k as i32)) * rgamma(p.beta_p - p.alpha * k as f64);
    }
    s
}
