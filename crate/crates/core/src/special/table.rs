//! Piecewise Chebyshev interpolant of x ↦ E_{α,β'}(−x) on [0, x_max], used
//! where the solver needs millions of kernel evaluations.

use super::mittag_leffler::{mittag_leffler, MLParams};
use crate::error::{Error, Result};

const DEGREE: usize = 24;
const TAIL_TOL: f64 = 5e-14;
const MAX_DEPTH: u32 = 12;

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlTable {
    params: MLParams,
    x_max: f64,
    starts: Vec<f64>,
    panels: Vec<Panel>,
}

impl MlTable {
    pub fn new(params: MLParams, x_max: f64) -> Result<Self> {
        params.validate()?;
        if !(x_max.is_finite() && x_max >= 0.0) {
            return Err(Error::domain(format!("table range {x_max} is invalid")));
        }
        let top = x_max.max(1.0);
        let mut seeds = vec![0.0];
        let mut edge = 1.0;
        while edge < top {
            seeds.push(edge);
            edge *= 2.0;
        }
        seeds.push(top);
        let mut panels = Vec::new();
        for w in seeds.windows(2) {
            build(params, w[0], w[1], 0, &mut panels)?;
        }
        let starts = panels.iter().map(|p| p.a).collect();
        Ok(MlTable {
            params,
            x_max: top,
            starts,
            panels,
        })
    }

    pub fn params(&self) -> MLParams {
        self.params
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// E_{α,β'}(−x). Falls back to direct evaluation outside the table.
    pub fn eval_neg(&self, x: f64) -> f64 {
        if !(0.0..=self.x_max).contains(&x) {
            return mittag_leffler(self.params, -x).unwrap_or(f64::NAN);
        }
        let idx = match self.starts.binary_search_by(|s| s.total_cmp(&x)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let p = &self.panels[idx];
        clenshaw(&p.coeffs, (2.0 * x - p.a - p.b) / (p.b - p.a))
    }
}

fn build(params: MLParams, a: f64, b: f64, depth: u32, out: &mut Vec<Panel>) -> Result<()> {
    let n = DEGREE + 1;
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
        let x = 0.5 * (a + b) + 0.5 * (b - a) * theta.cos();
        vals.push(mittag_leffler(params, -x)?);
    }
    let mut coeffs = vec![0.0; n];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, v) in vals.iter().enumerate() {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            s += v * (j as f64 * theta).cos();
        }
        *c = 2.0 * s / n as f64;
    }
    coeffs[0] *= 0.5;
    let tail = coeffs[n - 1].abs() + coeffs[n - 2].abs() + coeffs[n - 3].abs();
    // direct evaluation is only good to a few ulps of the panel scale
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    if tail > TAIL_TOL * scale && depth < MAX_DEPTH {
        let m = 0.5 * (a + b);
        build(params, a, m, depth + 1, out)?;
        build(params, m, b, depth + 1, out)?;
    } else {
        out.push(Panel { a, b, coeffs });
    }
    Ok(())
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let t = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = t;
    }
    x * b1 - b2 + c[0]
}
