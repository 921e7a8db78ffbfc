//! Quadrature building blocks: Gauss–Jacobi rules (Golub–Welsch), an
//! adaptive Gauss–Kronrod integrator, and a composite rule for integrands
//! carrying algebraic weights at two points.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::special::gamma::ln_gamma_unchecked;

/// Nodes and weights on [−1, 1] for the weight (1−x)^a (1+x)^b.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1 && a > -1.0 && b > -1.0, "invalid Jacobi rule parameters");
        let ab = a + b;
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
            jm[(k, k)] = diag;
            if k + 1 < n {
                let j = kf + 1.0;
                let off2 = if k == 0 {
                    4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
                } else {
                    4.0 * j * (j + a) * (j + b) * (j + ab)
                        / ((2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0))
                };
                let off = off2.sqrt();
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma_unchecked(a + 1.0)
            + ln_gamma_unchecked(b + 1.0)
            - ln_gamma_unchecked(ab + 2.0))
        .exp();
        let eig = SymmetricEigen::new(jm);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        JacobiRule {
            a,
            b,
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn legendre(n: usize) -> Self {
        Self::new(n, 0.0, 0.0)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) over the panels delimited by `breaks`.
/// Returns the integral and the accumulated error estimate.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    let mut panels: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || panels.len() >= max_panels {
            return (total, err);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (a, b, _, _) = panels.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return (total, err);
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

/// Composite rule for ∫ (t−r)^mu (r−t0)^nu φ(r) dr over sub-intervals of
/// [t0, t] with smooth φ. Cells touching t0 (or t) use a Jacobi rule that
/// absorbs the corresponding algebraic factor; cells close to either point
/// relative to their width are split geometrically.
#[derive(Debug, Clone)]
pub struct SingularRule {
    pub mu: f64,
    pub nu: f64,
    plain: JacobiRule,
    left: Option<JacobiRule>,
    right: Option<JacobiRule>,
    both: Option<JacobiRule>,
}

const RULE_POINTS: usize = 16;
const NEAR: f64 = 0.25;

impl SingularRule {
    pub fn new(mu: f64, nu: f64) -> Self {
        let left = (nu > -1.0).then(|| JacobiRule::new(RULE_POINTS, 0.0, nu));
        let right = (mu > -1.0).then(|| JacobiRule::new(RULE_POINTS, mu, 0.0));
        let both = (mu > -1.0 && nu > -1.0).then(|| JacobiRule::new(RULE_POINTS, mu, nu));
        SingularRule {
            mu,
            nu,
            plain: JacobiRule::legendre(RULE_POINTS),
            left,
            right,
            both,
        }
    }

    /// ∫_a^b (t−r)^mu (r−t0)^nu φ(r) dr with t0 ≤ a < b ≤ t.
    pub fn integrate<F: Fn(f64) -> f64>(&self, t0: f64, t: f64, a: f64, b: f64, phi: &F) -> f64 {
        let mut acc = 0.0;
        self.accumulate(t0, t, a, b, phi, &mut acc);
        acc
    }

    fn accumulate<F: Fn(f64) -> f64>(
        &self,
        t0: f64,
        t: f64,
        a: f64,
        b: f64,
        phi: &F,
        acc: &mut f64,
    ) {
        let w = b - a;
        if w <= 0.0 {
            return;
        }
        let scale = (t - t0).abs().max(1e-300);
        let left_touch = self.nu != 0.0 && (a - t0) <= 1e-15 * scale;
        let right_touch = self.mu != 0.0 && (t - b) <= 1e-15 * scale;
        let dl = a - t0;
        let dr = t - b;
        if self.nu != 0.0 && !left_touch && dl < NEAR * w * (1.0 - 1e-9) {
            let cut = a + dl / NEAR;
            self.accumulate(t0, t, a, cut, phi, acc);
            self.accumulate(t0, t, cut, b, phi, acc);
            return;
        }
        if self.mu != 0.0 && !right_touch && dr < NEAR * w * (1.0 - 1e-9) {
            let cut = b - dr / NEAR;
            self.accumulate(t0, t, a, cut, phi, acc);
            self.accumulate(t0, t, cut, b, phi, acc);
            return;
        }
        let half = 0.5 * w;
        let map = |x: f64| a + (x + 1.0) * half;
        let (rule, pref) = match (left_touch, right_touch) {
            (true, true) => (
                self.both.as_ref().expect("integrable weights"),
                half.powf(1.0 + self.mu + self.nu),
            ),
            (true, false) => (
                self.left.as_ref().expect("integrable weight at t0"),
                half.powf(1.0 + self.nu),
            ),
            (false, true) => (
                self.right.as_ref().expect("integrable weight at t"),
                half.powf(1.0 + self.mu),
            ),
            (false, false) => (&self.plain, half),
        };
        let mut s = 0.0;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let r = map(*x);
            let mut v = phi(r);
            if !left_touch && self.nu != 0.0 {
                v *= (r - t0).powf(self.nu);
            }
            if !right_touch && self.mu != 0.0 {
                v *= (t - r).powf(self.mu);
            }
            s += wt * v;
        }
        *acc += pref * s;
    }

    /// Weights (w_a, w_b) such that the integral over [a, b] of the linear
    /// interpolant through (a, y_a), (b, y_b) equals w_a·y_a + w_b·y_b.
    pub fn hat_weights(&self, t0: f64, t: f64, a: f64, b: f64) -> (f64, f64) {
        let w = b - a;
        let m0 = self.integrate(t0, t, a, b, &|_| 1.0);
        let m1 = self.integrate(t0, t, a, b, &|r| (r - a) / w);
        (m0 - m1, m1)
    }

    /// Weights for the piecewise-linear interpolant through `points`
    /// (strictly increasing, all > t0) integrated over [t0, points.last()].
    /// On [t0, points[0]] the first segment's line is extended; with a single
    /// point the interpolant is constant there.
    pub fn interpolant_weights(&self, t0: f64, t: f64, points: &[f64]) -> Vec<f64> {
        let k = points.len();
        let mut w = vec![0.0; k];
        if k == 0 {
            return w;
        }
        if k == 1 {
            w[0] = self.integrate(t0, t, t0, points[0], &|_| 1.0);
            return w;
        }
        let (p0, p1) = (points[0], points[1]);
        let h = p1 - p0;
        w[0] += self.integrate(t0, t, t0, p0, &|r| (p1 - r) / h);
        w[1] += self.integrate(t0, t, t0, p0, &|r| (r - p0) / h);
        for i in 0..k - 1 {
            let (wa, wb) = self.hat_weights(t0, t, points[i], points[i + 1]);
            w[i] += wa;
            w[i + 1] += wb;
        }
        w
    }
}
