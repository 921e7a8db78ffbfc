//! Quadratures for the history integrals inside Φ_j. Each source interval
//! is reduced to points s_q and weights so that, for a target r beyond the
//! interval, ∫ f(s) (r − s)^{−1−β} ds ≈ Σ_q ω_q f(s_q) (r − s)^{−1−β}.

use crate::quadrature::JacobiRule;

const CELL_POINTS: usize = 8;
const PANEL_POINTS: usize = 16;

/// A solve interval (u_k, t_{k+1}] sampled at `nodes`. The integrand
/// z(s) = (s − u_k)^{−σ} Y(s) with Y the piecewise-linear interpolant of the
/// weighted samples; the first cell extends the line through the first two
/// nodes and carries the weight (s − u_k)^{−σ} in a Jacobi rule.
#[derive(Debug, Clone)]
pub(crate) struct SolveSource {
    points: Vec<f64>,
    weights: Vec<f64>,
    /// left node of the line used at each point, and the two basis values
    basis: Vec<(usize, f64, f64)>,
    /// (s_l − u_k)^σ, folded into the node weights
    node_factor: Vec<f64>,
}

impl SolveSource {
    pub fn new(origin: f64, nodes: &[f64], sigma: f64) -> Self {
        assert!(nodes.len() >= 2, "a source needs two nodes");
        let gl = JacobiRule::legendre(CELL_POINTS);
        let first = JacobiRule::new(CELL_POINTS, 0.0, -sigma);
        let mut points = Vec::with_capacity(nodes.len() * CELL_POINTS);
        let mut weights = Vec::with_capacity(points.capacity());
        let mut basis = Vec::with_capacity(points.capacity());
        let (x0, x1) = (nodes[0], nodes[1]);
        let w = x0 - origin;
        let scale = (0.5 * w).powf(1.0 - sigma);
        for (x, jw) in first.nodes.iter().zip(&first.weights) {
            let s = origin + 0.5 * (x + 1.0) * w;
            points.push(s);
            weights.push(jw * scale);
            basis.push((0, (x1 - s) / (x1 - x0), (s - x0) / (x1 - x0)));
        }
        for c in 0..nodes.len() - 1 {
            let (a, b) = (nodes[c], nodes[c + 1]);
            let h = b - a;
            for (x, gw) in gl.nodes.iter().zip(&gl.weights) {
                let s = a + 0.5 * (x + 1.0) * h;
                points.push(s);
                weights.push(gw * 0.5 * h * (s - origin).powf(-sigma));
                basis.push((c, (b - s) / h, (s - a) / h));
            }
        }
        let node_factor = nodes.iter().map(|&x| (x - origin).powf(sigma)).collect();
        SolveSource {
            points,
            weights,
            basis,
            node_factor,
        }
    }

    /// Weights on the node values z_l for the kernel (r − s)^{−1−β}.
    pub fn row(&self, r: f64, beta: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.node_factor.len()];
        for ((&s, &w), &(l, ba, bb)) in self.points.iter().zip(&self.weights).zip(&self.basis) {
            let k = w * (r - s).powf(-1.0 - beta);
            row[l] += k * ba;
            row[l + 1] += k * bb;
        }
        for (x, f) in row.iter_mut().zip(&self.node_factor) {
            *x *= f;
        }
        row
    }
}

/// An impulse interval (t_p, u_p] where z(s) = (u_p − s)^{1+β} ψ_p(s, z_L).
/// Panels shrink geometrically toward u_p down to `finest`, so the bounded
/// integrand ((u_p − s)/(r − s))^{1+β} ψ is resolved for targets r ≥ u_p +
/// 4·finest. The weights include (u_p − s)^{1+β}; the panel touching u_p
/// integrates it exactly.
#[derive(Debug, Clone)]
pub(crate) struct ImpulseSource {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ImpulseSource {
    pub fn new(start: f64, end: f64, beta: f64, finest: f64) -> Self {
        let gl = JacobiRule::legendre(PANEL_POINTS);
        let edge = JacobiRule::new(PANEL_POINTS, 1.0 + beta, 0.0);
        let len = end - start;
        let d = finest.min(len).max(len * 1e-14);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let a = end - d;
        for (x, w) in edge.nodes.iter().zip(&edge.weights) {
            points.push(a + 0.5 * (x + 1.0) * d);
            weights.push(w * (0.5 * d).powf(2.0 + beta));
        }
        let mut hi = a;
        let mut width = d;
        while hi > start {
            let lo = (hi - width).max(start);
            let h = hi - lo;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let s = lo + 0.5 * (x + 1.0) * h;
                points.push(s);
                weights.push(w * 0.5 * h * (end - s).powf(1.0 + beta));
            }
            hi = lo;
            width *= 2.0;
        }
        ImpulseSource { points, weights }
    }

    /// ∫ (u_p − s)^{1+β} f(s) ds for f sampled at the points.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weights on ψ(s_q) for the kernel (r − s)^{−1−β}.
    pub fn row(&self, r: f64, beta: f64) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * (r - s).powf(-1.0 - beta))
            .collect()
    }
}
