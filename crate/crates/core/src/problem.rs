//! Problem data: the impulse timetable, the nonlinearity and impulse
//! catalogs with their Lipschitz constants, and the full problem
//! description with its JSON document form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resolvent::ResolventParams;
use crate::state::SpectralState;

/// 0 = u_0 < t_1 < u_1 < … < u_m < t_{m+1} = a.
///
/// Solve intervals are (u_j, t_{j+1}] for j = 0..m; impulse intervals are
/// (t_j, u_j] for j = 1..m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionDoc", into = "PartitionDoc")]
pub struct Partition {
    u: Vec<f64>,
    t: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionDoc {
    u: Vec<f64>,
    t: Vec<f64>,
}

impl TryFrom<PartitionDoc> for Partition {
    type Error = Error;
    fn try_from(d: PartitionDoc) -> Result<Self> {
        Partition::new(d.u, d.t)
    }
}

impl From<Partition> for PartitionDoc {
    fn from(p: Partition) -> Self {
        PartitionDoc { u: p.u, t: p.t }
    }
}

impl Partition {
    /// `u = [u_0..u_m]` and `t = [t_1..t_{m+1}]`. A trailing `u_{m+1} = a`
    /// is accepted and dropped.
    pub fn new(mut u: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::Validation("partition needs at least t_1".into()));
        }
        if u.len() == t.len() + 1 && u.last() == t.last() {
            u.pop();
        }
        if u.len() != t.len() {
            return Err(Error::Validation(format!(
                "partition has {} u-points and {} t-points; expected u_0..u_m and t_1..t_(m+1)",
                u.len(),
                t.len()
            )));
        }
        if let Some(x) = u.iter().chain(&t).find(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("partition point {x} is not finite")));
        }
        if u[0] != 0.0 {
            return Err(Error::Validation(format!("u_0 = {} must be 0", u[0])));
        }
        for j in 0..u.len() {
            if !(u[j] < t[j]) {
                return Err(Error::Validation(format!(
                    "u_{j} = {} must be < t_{} = {}",
                    u[j],
                    j + 1,
                    t[j]
                )));
            }
            if j + 1 < u.len() && !(t[j] < u[j + 1]) {
                return Err(Error::Validation(format!(
                    "t_{} = {} must be < u_{} = {}",
                    j + 1,
                    t[j],
                    j + 1,
                    u[j + 1]
                )));
            }
        }
        Ok(Partition { u, t })
    }

    /// Number of impulses.
    pub fn m(&self) -> usize {
        self.u.len() - 1
    }

    pub fn a(&self) -> f64 {
        *self.t.last().expect("non-empty")
    }

    /// u_j, j = 0..=m+1 (u_{m+1} = a).
    pub fn u(&self, j: usize) -> f64 {
        if j == self.u.len() {
            self.a()
        } else {
            self.u[j]
        }
    }

    /// t_j, j = 1..=m+1.
    pub fn t(&self, j: usize) -> f64 {
        assert!(j >= 1, "t is indexed from 1");
        self.t[j - 1]
    }

    pub fn u_points(&self) -> &[f64] {
        &self.u
    }

    pub fn t_points(&self) -> &[f64] {
        &self.t
    }

    /// (u_j, t_{j+1}), j = 0..=m.
    pub fn solve_interval(&self, j: usize) -> (f64, f64) {
        (self.u[j], self.t[j])
    }

    /// (t_j, u_j), j = 1..=m.
    pub fn impulse_interval(&self, j: usize) -> (f64, f64) {
        (self.t[j - 1], self.u[j])
    }

    /// τ = max_j (t_{j+1} − u_j).
    pub fn tau(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.t)
            .map(|(u, t)| t - u)
            .fold(0.0, f64::max)
    }
}

/// h(t, z), applied coefficientwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    Zero {},
    /// λ z
    Linear { lambda: f64 },
    /// ε sin(z)
    Sine { epsilon: f64 },
    /// λ cos(ωt) z
    ModulatedLinear { lambda: f64, omega: f64 },
    /// ε cos(ωt) sin(z)
    ModulatedSine { epsilon: f64, omega: f64 },
}

impl Nonlinearity {
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Nonlinearity::Zero {} => 0.0,
            Nonlinearity::Linear { lambda } | Nonlinearity::ModulatedLinear { lambda, .. } => {
                lambda.abs()
            }
            Nonlinearity::Sine { epsilon } | Nonlinearity::ModulatedSine { epsilon, .. } => {
                epsilon.abs()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.lipschitz() == 0.0
    }

    /// h(t, ·) on one coefficient.
    #[inline]
    pub fn eval(&self, t: f64, z: f64) -> f64 {
        match *self {
            Nonlinearity::Zero {} => 0.0,
            Nonlinearity::Linear { lambda } => lambda * z,
            Nonlinearity::Sine { epsilon } => epsilon * z.sin(),
            Nonlinearity::ModulatedLinear { lambda, omega } => lambda * (omega * t).cos() * z,
            Nonlinearity::ModulatedSine { epsilon, omega } => {
                epsilon * (omega * t).cos() * z.sin()
            }
        }
    }

    pub fn apply(&self, t: f64, z: &SpectralState) -> SpectralState {
        let mut out = z.clone();
        for c in out.coeffs_mut() {
            *c = self.eval(t, *c);
        }
        out
    }

    fn validate(&self, path: &str) -> Result<()> {
        let ok = match *self {
            Nonlinearity::Zero {} => true,
            Nonlinearity::Linear { lambda } => lambda.is_finite(),
            Nonlinearity::Sine { epsilon } => epsilon.is_finite(),
            Nonlinearity::ModulatedLinear { lambda, omega } => lambda.is_finite() && omega.is_finite(),
            Nonlinearity::ModulatedSine { epsilon, omega } => {
                epsilon.is_finite() && omega.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("{path}: parameters must be finite")))
        }
    }
}

/// ψ_j(t, z); the impulse map is φ_j(t, z) = (u_j − t)^{1+β} ψ_j(t, z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Impulse {
    Zero {},
    /// λ z
    Linear { lambda: f64 },
    /// ε sin(z)
    Sine { epsilon: f64 },
    /// λ cos(ωt) z
    ModulatedLinear { lambda: f64, omega: f64 },
    /// λ z + offset; `offset` holds sine coefficients, zero-padded.
    Affine { lambda: f64, offset: Vec<f64> },
}

impl Impulse {
    pub fn lipschitz(&self) -> f64 {
        match self {
            Impulse::Zero {} => 0.0,
            Impulse::Linear { lambda }
            | Impulse::ModulatedLinear { lambda, .. }
            | Impulse::Affine { lambda, .. } => lambda.abs(),
            Impulse::Sine { epsilon } => epsilon.abs(),
        }
    }

    /// ψ(t, ·) on coefficient `mode` (0-based).
    #[inline]
    pub fn eval(&self, t: f64, mode: usize, z: f64) -> f64 {
        match self {
            Impulse::Zero {} => 0.0,
            Impulse::Linear { lambda } => lambda * z,
            Impulse::Sine { epsilon } => epsilon * z.sin(),
            Impulse::ModulatedLinear { lambda, omega } => lambda * (omega * t).cos() * z,
            Impulse::Affine { lambda, offset } => {
                lambda * z + offset.get(mode).copied().unwrap_or(0.0)
            }
        }
    }

    pub fn psi(&self, t: f64, z: &SpectralState) -> SpectralState {
        let mut out = z.clone();
        for (m, c) in out.coeffs_mut().iter_mut().enumerate() {
            *c = self.eval(t, m, *c);
        }
        out
    }

    fn validate(&self, path: &str, modes: usize) -> Result<()> {
        let ok = match self {
            Impulse::Zero {} => true,
            Impulse::Linear { lambda } => lambda.is_finite(),
            Impulse::Sine { epsilon } => epsilon.is_finite(),
            Impulse::ModulatedLinear { lambda, omega } => lambda.is_finite() && omega.is_finite(),
            Impulse::Affine { lambda, offset } => {
                if offset.len() > modes {
                    return Err(Error::Validation(format!(
                        "{path}.offset: {} coefficients exceed the {modes} modes",
                        offset.len()
                    )));
                }
                lambda.is_finite() && offset.iter().all(|x| x.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("{path}: parameters must be finite")))
        }
    }
}

/// The JSON problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub beta: f64,
    pub partition: Partition,
    pub modes: usize,
    pub z0: Vec<f64>,
    pub ztilde: Vec<Vec<f64>>,
    pub h: Nonlinearity,
    pub impulses: Vec<Impulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub beta: f64,
    pub partition: Partition,
    pub resolvent: ResolventParams,
    pub z0: SpectralState,
    /// z̃_0..z̃_m
    pub ztilde: Vec<SpectralState>,
    pub h: Nonlinearity,
    /// ψ_1..ψ_m
    pub impulses: Vec<Impulse>,
    pub q_diag: Option<f64>,
}

fn padded(path: &str, coeffs: &[f64], modes: usize) -> Result<SpectralState> {
    if coeffs.len() > modes {
        return Err(Error::Validation(format!(
            "{path}: {} coefficients exceed the {modes} modes",
            coeffs.len()
        )));
    }
    let mut v = coeffs.to_vec();
    v.resize(modes, 0.0);
    SpectralState::new(v).map_err(|e| match e {
        Error::Validation(m) => Error::Validation(format!("{path}: {m}")),
        other => other,
    })
}

impl ProblemSpec {
    pub fn from_document(doc: &ProblemDocument) -> Result<Self> {
        if !(doc.beta > 1.0 && doc.beta < 2.0) {
            return Err(Error::Validation(format!("beta = {} must lie in (1, 2)", doc.beta)));
        }
        if doc.modes == 0 {
            return Err(Error::Validation("modes must be at least 1".into()));
        }
        let m = doc.partition.m();
        if doc.ztilde.len() != m + 1 {
            return Err(Error::Validation(format!(
                "ztilde has {} entries; the partition needs {} (z̃_0..z̃_m)",
                doc.ztilde.len(),
                m + 1
            )));
        }
        if doc.impulses.len() != m {
            return Err(Error::Validation(format!(
                "impulses has {} entries; the partition has {m} impulses",
                doc.impulses.len()
            )));
        }
        if let Some(q) = doc.q {
            if !q.is_finite() {
                return Err(Error::Validation("q must be finite".into()));
            }
        }
        doc.h.validate("h")?;
        for (j, imp) in doc.impulses.iter().enumerate() {
            imp.validate(&format!("impulses[{j}]"), doc.modes)?;
        }
        let z0 = padded("z0", &doc.z0, doc.modes)?;
        let ztilde = doc
            .ztilde
            .iter()
            .enumerate()
            .map(|(j, c)| padded(&format!("ztilde[{j}]"), c, doc.modes))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProblemSpec {
            beta: doc.beta,
            partition: doc.partition.clone(),
            resolvent: ResolventParams::dirichlet(doc.beta, doc.modes)?,
            z0,
            ztilde,
            h: doc.h.clone(),
            impulses: doc.impulses.clone(),
            q_diag: doc.q,
        })
    }

    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            beta: self.beta,
            partition: self.partition.clone(),
            modes: self.modes(),
            z0: self.z0.coeffs().to_vec(),
            ztilde: self.ztilde.iter().map(|s| s.coeffs().to_vec()).collect(),
            h: self.h.clone(),
            impulses: self.impulses.clone(),
            q: self.q_diag,
        }
    }

    pub fn modes(&self) -> usize {
        self.resolvent.modes()
    }

    pub fn m(&self) -> usize {
        self.partition.m()
    }

    pub fn lambda_h(&self) -> f64 {
        self.h.lipschitz()
    }

    /// λ_ψj, j = 1..m.
    pub fn lambda_psi(&self) -> Vec<f64> {
        self.impulses.iter().map(Impulse::lipschitz).collect()
    }

    /// λ_φj = (u_j − t_j)^{1+β} λ_ψj, j = 1..m.
    pub fn lambda_phi(&self) -> Vec<f64> {
        (1..=self.m())
            .map(|j| {
                let (tj, uj) = self.partition.impulse_interval(j);
                (uj - tj).powf(1.0 + self.beta) * self.impulses[j - 1].lipschitz()
            })
            .collect()
    }

    /// φ_j(t, z) = (u_j − t)^{1+β} ψ_j(t, z).
    pub fn phi(&self, j: usize, t: f64, z: &SpectralState) -> SpectralState {
        let uj = self.partition.u(j);
        self.impulses[j - 1]
            .psi(t, z)
            .scaled((uj - t).max(0.0).powf(1.0 + self.beta))
    }

    /// Same problem with a different mode count; coefficient data is
    /// truncated or zero-padded.
    pub fn with_modes(&self, modes: usize) -> Result<Self> {
        let mut doc = self.to_document();
        doc.modes = modes;
        let fit = |c: &mut Vec<f64>| c.resize(modes, 0.0);
        fit(&mut doc.z0);
        doc.ztilde.iter_mut().for_each(fit);
        for imp in &mut doc.impulses {
            if let Impulse::Affine { offset, .. } = imp {
                offset.truncate(modes);
            }
        }
        ProblemSpec::from_document(&doc)
    }
}

/// Data for the Dirichlet-Laplacian example on [0, π] over [0, 1] with three
/// impulses: `h = δ sin(z)`, `ψ_j = δ z`, `z0 = v(π − v)`, and alternating
/// single-mode z̃_j.
pub fn example_problem(delta: f64, modes: usize) -> Result<ProblemSpec> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Validation(format!("delta = {delta} must be non-negative")));
    }
    let z0: Vec<f64> = (1..=modes)
        .map(|g| {
            if g % 2 == 1 {
                8.0 / (std::f64::consts::PI * (g * g * g) as f64)
            } else {
                0.0
            }
        })
        .collect();
    let ztilde = (0..4)
        .map(|j| {
            let mut c = vec![0.0; modes.min(2)];
            c[0] = if j % 2 == 0 { 0.5 } else { -0.5 };
            if modes > 1 {
                c[1] = 0.25;
            }
            c
        })
        .collect();
    let doc = ProblemDocument {
        beta: 1.8,
        partition: Partition::new(vec![0.0, 0.3, 0.6, 0.9], vec![0.1, 0.4, 0.7, 1.0])?,
        modes,
        z0,
        ztilde,
        h: Nonlinearity::Sine { epsilon: delta },
        impulses: vec![Impulse::Linear { lambda: delta }; 3],
        q: None,
    };
    ProblemSpec::from_document(&doc)
}

/// Default scaling and mode count of the example.
pub const EXAMPLE_DELTA: f64 = 0.5;
pub const EXAMPLE_MODES: usize = 16;
