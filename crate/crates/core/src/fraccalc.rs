//! Riemann-Liouville integrals and derivatives of sampled scalar functions.
//!
//! A [`SampledFn`] stores values on nodes to the right of its lower limit
//! `t0`, together with a weight exponent `σ`: the blow-up order at `t0`, or
//! any larger exponent below 1 that makes `(r − t0)^σ f(r)` smoother. Integrals use
//! product integration: the weighted samples `(r − t0)^σ f(r)` are
//! interpolated piecewise-linearly and integrated against the exact weight
//! `(t − r)^{q−1} (r − t0)^{−σ}`. Derivatives differentiate the integral of
//! complementary order with a three-point stencil on the mesh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::SingularRule;
use crate::special::{gamma_fn, rgamma};

/// Nodes `t0 + (t_end − t0)(i/n)^grading` for `i = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedMesh {
    pub t0: f64,
    pub t_end: f64,
    pub n: usize,
    pub grading: f64,
}

impl GradedMesh {
    pub fn new(t0: f64, t_end: f64, n: usize, grading: f64) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(Error::domain(format!("mesh interval ({t0}, {t_end}] is empty")));
        }
        if n < 8 {
            return Err(Error::domain(format!("mesh needs at least 8 nodes, got {n}")));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(Error::domain(format!("grading {grading} must be >= 1")));
        }
        Ok(GradedMesh { t0, t_end, n, grading })
    }

    pub fn nodes(&self) -> Vec<f64> {
        let len = self.t_end - self.t0;
        (1..=self.n)
            .map(|i| {
                if i == self.n {
                    self.t_end
                } else {
                    self.t0 + len * (i as f64 / self.n as f64).powf(self.grading)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFn {
    t0: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    singular_exponent: f64,
}

impl SampledFn {
    pub fn new(t0: f64, nodes: Vec<f64>, values: Vec<f64>, singular_exponent: f64) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::domain("node and value counts differ"));
        }
        if nodes.len() < 2 {
            return Err(Error::domain("at least two samples are required"));
        }
        if !t0.is_finite() || nodes[0] <= t0 {
            return Err(Error::domain("all nodes must lie strictly right of t0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|x| x.is_finite()) {
            return Err(Error::domain("nodes must be finite and strictly increasing"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("sample values must be finite"));
        }
        if !(singular_exponent.is_finite() && (0.0..1.0).contains(&singular_exponent)) {
            return Err(Error::domain(format!(
                "singular exponent {singular_exponent} must lie in [0, 1)"
            )));
        }
        Ok(SampledFn {
            t0,
            nodes,
            values,
            singular_exponent,
        })
    }

    /// Samples `f` on the mesh nodes.
    pub fn from_fn(mesh: &GradedMesh, singular_exponent: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = mesh.nodes();
        let values = nodes.iter().map(|&t| f(t)).collect();
        SampledFn::new(mesh.t0, nodes, values, singular_exponent)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn singular_exponent(&self) -> f64 {
        self.singular_exponent
    }

    /// Same nodes, values `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SampledFn, b: f64) -> Result<SampledFn> {
        if self.nodes != other.nodes || self.t0 != other.t0 {
            return Err(Error::domain("combined functions must share a mesh"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        SampledFn::new(
            self.t0,
            self.nodes.clone(),
            values,
            self.singular_exponent.max(other.singular_exponent),
        )
    }

    fn weighted(&self, i: usize) -> f64 {
        if self.singular_exponent == 0.0 {
            self.values[i]
        } else {
            (self.nodes[i] - self.t0).powf(self.singular_exponent) * self.values[i]
        }
    }

    /// Index k of the cell [x_k, x_{k+1}] holding t, clamped to the first
    /// and last cells.
    fn cell(&self, t: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    fn weighted_at(&self, t: f64) -> f64 {
        let k = self.cell(t);
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let (y0, y1) = (self.weighted(k), self.weighted(k + 1));
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// Piecewise-linear reconstruction at t.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        let y = self.weighted_at(t);
        Ok(if self.singular_exponent == 0.0 {
            y
        } else {
            y * (t - self.t0).powf(-self.singular_exponent)
        })
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let last = *self.nodes.last().expect("non-empty");
        if !(t > self.t0 && t <= last) {
            return Err(Error::domain(format!(
                "t = {t} outside the sampled range ({}, {last}]",
                self.t0
            )));
        }
        Ok(())
    }
}

fn check_order(order: f64) -> Result<()> {
    if !(order > 0.0 && order < 2.0) {
        return Err(Error::domain(format!("order {order} must lie in (0, 2)")));
    }
    Ok(())
}

/// Evaluates I^q f at many points with one set of Jacobi rules.
struct Integrator<'a> {
    f: &'a SampledFn,
    rule: SingularRule,
    inv_gamma: f64,
}

impl<'a> Integrator<'a> {
    fn new(f: &'a SampledFn, q: f64) -> Self {
        Integrator {
            f,
            rule: SingularRule::new(q - 1.0, -f.singular_exponent),
            inv_gamma: rgamma(q),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let f = self.f;
        let k = f.nodes.partition_point(|&x| x <= t);
        if k == 0 {
            // t inside the first cell: the interpolant is the line through
            // the first two samples
            let (x0, x1) = (f.nodes[0], f.nodes[1]);
            let (y0, y1) = (f.weighted(0), f.weighted(1));
            let line = |r: f64| y0 + (y1 - y0) * (r - x0) / (x1 - x0);
            return self.inv_gamma * self.rule.integrate(f.t0, t, f.t0, t, &line);
        }
        let mut pts: Vec<f64> = f.nodes[..k].to_vec();
        let mut ys: Vec<f64> = (0..k).map(|i| f.weighted(i)).collect();
        if pts[k - 1] < t {
            pts.push(t);
            ys.push(f.weighted_at(t));
        }
        if pts.len() == 1 {
            // t is the first node; keep the first-cell line
            let (x0, x1) = (f.nodes[0], f.nodes[1]);
            let (y0, y1) = (f.weighted(0), f.weighted(1));
            let line = |r: f64| y0 + (y1 - y0) * (r - x0) / (x1 - x0);
            return self.inv_gamma * self.rule.integrate(f.t0, t, f.t0, t, &line);
        }
        let w = self.rule.interpolant_weights(f.t0, t, &pts);
        self.inv_gamma * w.iter().zip(&ys).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// (1/Γ(order)) ∫_{t0}^{t} (t−r)^{order−1} f(r) dr.
pub fn rl_integral(f: &SampledFn, order: f64, t: f64) -> Result<f64> {
    check_order(order)?;
    f.check_range(t)?;
    Ok(Integrator::new(f, order).eval(t))
}

/// Number of classical derivatives applied after integrating.
fn derivative_count(order: f64) -> usize {
    if order <= 1.0 {
        1
    } else {
        2
    }
}

struct Differentiator<'a> {
    f: &'a SampledFn,
    count: usize,
    integrator: Option<Integrator<'a>>,
}

impl<'a> Differentiator<'a> {
    fn new(f: &'a SampledFn, order: f64) -> Self {
        let count = derivative_count(order);
        let q = count as f64 - order;
        Differentiator {
            f,
            count,
            integrator: (q > 0.0).then(|| Integrator::new(f, q)),
        }
    }

    fn antiderivative(&self, t: f64) -> f64 {
        match &self.integrator {
            Some(i) => i.eval(t),
            None => self.f.value_at(t).expect("in range"),
        }
    }

    fn at_node(&self, i: usize, fm: f64, f0: f64, fp: f64) -> f64 {
        stencil(&self.f.nodes, self.count, i, fm, f0, fp)
    }

    fn node(&self, i: usize) -> f64 {
        let x = &self.f.nodes;
        let fm = self.antiderivative(x[i - 1]);
        let f0 = self.antiderivative(x[i]);
        let fp = self.antiderivative(x[i + 1]);
        self.at_node(i, fm, f0, fp)
    }
}

/// D^order f(t): the first (order ≤ 1) or second classical derivative of
/// the complementary integral, by a three-point stencil on the mesh. Between
/// nodes the stencil values at the four surrounding nodes are interpolated
/// by a cubic.
pub fn rl_derivative(f: &SampledFn, order: f64, t: f64) -> Result<f64> {
    check_order(order)?;
    f.check_range(t)?;
    let x = &f.nodes;
    let n = x.len();
    let d = Differentiator::new(f, order);
    let scale = (x[n - 1] - f.t0).abs();
    let k = f.cell(t);
    for i in [k, k + 1] {
        if (t - x[i]).abs() <= 1e-12 * scale {
            if i == 0 || i + 1 >= n {
                return Err(Error::Stencil(format!(
                    "t = {t} is a boundary node; the stencil needs a node on each side"
                )));
            }
            return Ok(d.node(i));
        }
    }
    if k < 2 || k + 3 > n {
        return Err(Error::Stencil(format!(
            "t = {t} is too close to the mesh ends for the interpolated stencil"
        )));
    }
    let idx = [k - 1, k, k + 1, k + 2];
    let vals: Vec<f64> = idx.iter().map(|&i| d.node(i)).collect();
    let mut acc = 0.0;
    for (a, &ia) in idx.iter().enumerate() {
        let mut l = 1.0;
        for &ib in &idx {
            if ib != ia {
                l *= (t - x[ib]) / (x[ia] - x[ib]);
            }
        }
        acc += l * vals[a];
    }
    Ok(acc)
}

/// Derivative at node i (first or second, by `count`) from the values at
/// i−1, i, i+1 on a nonuniform mesh.
fn stencil(x: &[f64], count: usize, i: usize, fm: f64, f0: f64, fp: f64) -> f64 {
    let h1 = x[i] - x[i - 1];
    let h2 = x[i + 1] - x[i];
    if count == 2 {
        2.0 * (fp * h1 - f0 * (h1 + h2) + fm * h2) / (h1 * h2 * (h1 + h2))
    } else {
        -h2 / (h1 * (h1 + h2)) * fm + (h2 - h1) / (h1 * h2) * f0 + h1 / (h2 * (h1 + h2)) * fp
    }
}

/// D^order f at every node that has a neighbour on each side, as `(t, value)`.
pub fn rl_derivative_nodes(f: &SampledFn, order: f64) -> Result<Vec<(f64, f64)>> {
    let d = NodeDerivative::new(f.t0, &f.nodes, order, f.singular_exponent)?;
    Ok(f.nodes[1..f.nodes.len() - 1]
        .iter()
        .copied()
        .zip(d.apply(&f.values))
        .collect())
}

/// Product-integration weights for `∫_{t0}^{x_i} (x_i − r)^{q−1} (r − t0)^{−σ} Y(r) dr`
/// at every node `x_i` of a fixed mesh, `Y` being the piecewise-linear
/// interpolant of the weighted samples `(x_l − t0)^σ f(x_l)`. The weights
/// depend only on the mesh, so one set serves every function sampled on it.
#[derive(Debug, Clone)]
pub struct NodeWeights {
    t0: f64,
    nodes: Vec<f64>,
    sigma: f64,
    rows: Vec<Vec<f64>>,
}

impl NodeWeights {
    /// `q > 0`; row 0 spans the first two samples (the first-cell line).
    pub fn new(t0: f64, nodes: &[f64], q: f64, sigma: f64) -> Result<Self> {
        SampledFn::new(t0, nodes.to_vec(), vec![0.0; nodes.len()], sigma)?;
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::domain(format!("integral order {q} must be positive")));
        }
        let rule = SingularRule::new(q - 1.0, -sigma);
        let rows = (0..nodes.len())
            .map(|i| {
                if i == 0 {
                    let (x0, x1) = (nodes[0], nodes[1]);
                    let h = x1 - x0;
                    vec![
                        rule.integrate(t0, x0, t0, x0, &|r| (x1 - r) / h),
                        rule.integrate(t0, x0, t0, x0, &|r| (r - x0) / h),
                    ]
                } else {
                    rule.interpolant_weights(t0, nodes[i], &nodes[..=i])
                }
            })
            .collect();
        Ok(NodeWeights {
            t0,
            nodes: nodes.to_vec(),
            sigma,
            rows,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Weights of row i, for samples 0..row.len().
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// `(x_l − t0)^σ` per node.
    pub fn weight_factors(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&x| if self.sigma == 0.0 { 1.0 } else { (x - self.t0).powf(self.sigma) })
            .collect()
    }

    /// The integrals at every node for raw samples `values`.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = self
            .weight_factors()
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .collect();
        self.rows
            .iter()
            .map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// D^order at the interior nodes of a fixed mesh (all but the first and
/// last), reusable across sampled functions.
#[derive(Debug, Clone)]
pub struct NodeDerivative {
    count: usize,
    scale: f64,
    weights: Option<NodeWeights>,
    nodes: Vec<f64>,
}

impl NodeDerivative {
    pub fn new(t0: f64, nodes: &[f64], order: f64, sigma: f64) -> Result<Self> {
        check_order(order)?;
        if nodes.len() < 3 {
            return Err(Error::Stencil("the stencil needs at least three nodes".into()));
        }
        let count = derivative_count(order);
        let q = count as f64 - order;
        let weights = if q > 0.0 {
            Some(NodeWeights::new(t0, nodes, q, sigma)?)
        } else {
            SampledFn::new(t0, nodes.to_vec(), vec![0.0; nodes.len()], sigma)?;
            None
        };
        Ok(NodeDerivative {
            count,
            scale: if q > 0.0 { rgamma(q) } else { 1.0 },
            weights,
            nodes: nodes.to_vec(),
        })
    }

    /// Values at nodes 1..n−1.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let big: Vec<f64> = match &self.weights {
            Some(w) => w.apply(values).into_iter().map(|v| v * self.scale).collect(),
            None => values.to_vec(),
        };
        let x = &self.nodes;
        (1..x.len() - 1)
            .map(|i| stencil(x, self.count, i, big[i - 1], big[i], big[i + 1]))
            .collect()
    }
}

/// Γ(α)/Γ(α+order)·(t−t0)^{α+order−1}, the fractional integral of
/// (t−t0)^{α−1}; negative `order` gives the derivative. A pole of Γ(α+order)
/// yields 0.
pub fn power_integral_exact(alpha: f64, order: f64, t0: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha = {alpha} must be positive")));
    }
    if !order.is_finite() {
        return Err(Error::domain("order must be finite"));
    }
    if !(t > t0) {
        return Err(Error::domain(format!("t = {t} must exceed t0 = {t0}")));
    }
    let r = rgamma(alpha + order);
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_fn(alpha)? * r * (t - t0).powf(alpha + order - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionCheck {
    pub max_defect: f64,
    /// Extrapolated value of I^{2−order} f at t0.
    pub value_at_t0: f64,
    /// Extrapolated slope of I^{2−order} f at t0.
    pub slope_at_t0: f64,
    pub nodes_checked: usize,
}

const FIT_FIRST: usize = 4;

/// Least-squares fit c0 + c1 s + c2 s², returning (c0, c1).
fn quadratic_fit(s: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    let a = nalgebra::DMatrix::from_fn(s.len(), 3, |i, j| s[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(v);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Extrapolation(e.to_string()))?;
    Ok((sol[0], sol[1]))
}

/// Value and slope of `big` at t0. Fits on node windows [k, 2k) for
/// k = 4, 8, 16, … and keeps the pair of consecutive windows that agree
/// best: small k suffers from reconstruction error at the first cells,
/// large k from the curvature of the higher-order terms.
fn extrapolate_to_t0(s: &[f64], big: &[f64]) -> Result<(f64, f64)> {
    let mut fits = Vec::new();
    let mut k = FIT_FIRST;
    while 2 * k <= s.len() / 2 {
        fits.push(quadratic_fit(&s[k..2 * k], &big[k..2 * k])?);
        k *= 2;
    }
    if fits.len() < 2 {
        return Err(Error::Extrapolation("too few nodes to extrapolate to t0".into()));
    }
    let vscale = 1.0 + big.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sscale = vscale / s[s.len() - 1];
    let (mut best, mut gap) = (0, f64::INFINITY);
    for i in 0..fits.len() - 1 {
        let (a, b) = (fits[i], fits[i + 1]);
        let g = ((a.0 - b.0).abs() / vscale).max((a.1 - b.1).abs() / (sscale + b.1.abs()));
        if g < gap {
            best = i + 1;
            gap = g;
        }
    }
    if gap > 1e-3 {
        let (a, b) = (fits[best - 1], fits[best]);
        return Err(Error::Extrapolation(format!(
            "limits at t0 do not settle: value {} vs {}, slope {} vs {}",
            a.0, b.0, a.1, b.1
        )));
    }
    Ok(fits[best])
}

/// Max over interior nodes of |I^order D^order f − f + Σ correction|, where
/// the two correction coefficients are the value and slope of
/// I^{2−order} f at t0, extrapolated from the first nodes.
pub fn composition_check(f: &SampledFn, order: f64) -> Result<CompositionCheck> {
    if !(order > 1.0 && order < 2.0) {
        return Err(Error::domain(format!("order {order} must lie in (1, 2)")));
    }
    let x = &f.nodes;
    if x.len() < 4 * FIT_FIRST {
        return Err(Error::domain("too few nodes for the composition check"));
    }
    let integ = Integrator::new(f, 2.0 - order);
    let s: Vec<f64> = x.iter().map(|&t| t - f.t0).collect();
    let big: Vec<f64> = x.iter().map(|&t| integ.eval(t)).collect();
    let (c0, c1) = extrapolate_to_t0(&s, &big)?;
    let d = rl_derivative_nodes(f, order)?;
    let (dn, dv): (Vec<f64>, Vec<f64>) = d.into_iter().unzip();
    let df = SampledFn::new(f.t0, dn.clone(), dv, 0.0)?;
    let back = Integrator::new(&df, order);
    let g1 = rgamma(order);
    let g2 = rgamma(order - 1.0);
    let mut max_defect = 0.0f64;
    // skip the first interior node, whose cell is reconstructed by extension
    for (i, &t) in dn.iter().enumerate().skip(1) {
        let s = t - f.t0;
        let lhs = back.eval(t);
        let idx = i + 1;
        let rhs = f.values[idx] - c1 * g1 * s.powf(order - 1.0) - c0 * g2 * s.powf(order - 2.0);
        max_defect = max_defect.max((lhs - rhs).abs());
    }
    Ok(CompositionCheck {
        max_defect,
        value_at_t0: c0,
        slope_at_t0: c1,
        nodes_checked: dn.len() - 1,
    })
}
