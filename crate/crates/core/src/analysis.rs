//! The contraction constant c with its per-interval breakdown, and the
//! (A1)–(A5) checklist.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Partition, ProblemSpec};
use crate::resolvent::estimate_lambda_R;
use crate::special::gamma_fn;

/// Everything c depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ContractionInputs {
    pub beta: f64,
    pub partition: Partition,
    pub lambda_R: f64,
    pub lambda_h: f64,
    /// λ_ψj, j = 1..m
    pub lambda_psi: Vec<f64>,
}

impl ContractionInputs {
    #[allow(non_snake_case)]
    pub fn from_spec(spec: &ProblemSpec, lambda_R: f64) -> Self {
        ContractionInputs {
            beta: spec.beta,
            partition: spec.partition.clone(),
            lambda_R,
            lambda_h: spec.lambda_h(),
            lambda_psi: spec.lambda_psi(),
        }
    }

    /// λ_φj = (u_j − t_j)^{1+β} λ_ψj.
    pub fn lambda_phi(&self) -> Vec<f64> {
        (1..=self.partition.m())
            .map(|j| {
                let (tj, uj) = self.partition.impulse_interval(j);
                (uj - tj).powf(1.0 + self.beta) * self.lambda_psi[j - 1]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalTerms {
    /// Solve interval (u_j, t_{j+1}], j ≥ 1.
    pub j: usize,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub term4: f64,
    pub term5: f64,
    pub c_j: f64,
}

impl IntervalTerms {
    pub fn terms(&self) -> [f64; 5] {
        [self.term1, self.term2, self.term3, self.term4, self.term5]
    }
}

/// Where λ_R came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSource {
    Supplied,
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ContractionReport {
    pub c: f64,
    pub verdict: bool,
    /// The constant of the first solve interval, λ_R λ_h Γ(β−1)² t_1^β / Γ(2β−1).
    pub c0: f64,
    pub intervals: Vec<IntervalTerms>,
    pub lambda_R: f64,
    pub lambda_R_source: LambdaSource,
    pub lambda_h: f64,
    pub lambda_phi: Vec<f64>,
    pub lambda_psi: Vec<f64>,
    pub partition: Partition,
}

/// c = max(c0, max_j Σ terms_j).
pub fn contraction_from_inputs(inp: &ContractionInputs) -> Result<ContractionReport> {
    let beta = inp.beta;
    if !(beta > 1.0 && beta < 2.0) {
        return Err(Error::domain(format!("beta = {beta} must lie in (1, 2)")));
    }
    let p = &inp.partition;
    let m = p.m();
    if inp.lambda_psi.len() != m {
        return Err(Error::domain(format!(
            "{} impulse constants for {m} impulses",
            inp.lambda_psi.len()
        )));
    }
    let consts = [inp.lambda_R, inp.lambda_h]
        .into_iter()
        .chain(inp.lambda_psi.iter().copied());
    for x in consts {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::domain(format!("Lipschitz constant {x} must be finite and ≥ 0")));
        }
    }
    let (u, t) = (|j: usize| p.u(j), |j: usize| p.t(j));
    for j in 0..=m {
        if !(t(j + 1) > u(j)) || (j >= 1 && !(u(j) > t(j))) {
            return Err(Error::domain(format!("degenerate partition at j = {j}")));
        }
    }
    let lr = inp.lambda_R;
    let lphi = inp.lambda_phi();
    let g2b = gamma_fn(2.0 - beta)?;
    let h_factor = lr * inp.lambda_h * gamma_fn(beta - 1.0)?.powi(2) / gamma_fn(2.0 * beta - 1.0)?;
    let c0 = h_factor * t(1).powf(beta);

    let intervals: Vec<IntervalTerms> = (1..=m)
        .map(|j| {
            let lead = (t(j) - u(j - 1)).powf(2.0 - beta);
            let len = t(j + 1) - u(j);
            let term1 = lr * lphi[j - 1] / lead;
            let term2 = h_factor * len.powf(beta);
            let s3: f64 = (0..j)
                .map(|k| ((t(k + 1) - u(k)) / (u(j) - t(k + 1))).powf(beta - 1.0))
                .fold(0.0, |a, b| a + b);
            let term3 = lr / ((beta - 1.0) * g2b) * s3;
            let s4: f64 = (0..j.saturating_sub(1))
                .map(|k| {
                    lphi[k] * len * len
                        / ((t(k + 1) - u(k)).powf(2.0 - beta) * (u(j) - u(k + 1)).powf(beta))
                })
                .fold(0.0, |a, b| a + b);
            let term4 = lr / (beta * g2b) * s4;
            let term5 = lr * inp.lambda_psi[j - 1] * len * len / (g2b * lead);
            IntervalTerms {
                j,
                term1,
                term2,
                term3,
                term4,
                term5,
                c_j: term1 + term2 + term3 + term4 + term5,
            }
        })
        .collect();
    let c = intervals.iter().map(|r| r.c_j).fold(c0, f64::max);
    Ok(ContractionReport {
        c,
        verdict: c < 1.0,
        c0,
        intervals,
        lambda_R: lr,
        lambda_R_source: LambdaSource::Supplied,
        lambda_h: inp.lambda_h,
        lambda_phi: lphi,
        lambda_psi: inp.lambda_psi.clone(),
        partition: p.clone(),
    })
}

#[allow(non_snake_case)]
pub fn contraction_constant(spec: &ProblemSpec, lambda_R: f64) -> Result<ContractionReport> {
    contraction_from_inputs(&ContractionInputs::from_spec(spec, lambda_R))
}

/// Grid over (0, a] for the λ_R estimate: geometric down to 10⁻⁶a, plus uniform.
pub fn lambda_grid(a: f64) -> Vec<f64> {
    const GEOMETRIC: usize = 120;
    const UNIFORM: usize = 400;
    let mut g: Vec<f64> = (0..GEOMETRIC)
        .map(|i| a * 10f64.powf(-6.0 * (1.0 - i as f64 / GEOMETRIC as f64)))
        .chain((1..=UNIFORM).map(|i| a * i as f64 / UNIFORM as f64))
        .collect();
    g.sort_by(f64::total_cmp);
    g
}

/// λ_R estimated on [`lambda_grid`] over the problem horizon.
#[allow(non_snake_case)]
pub fn estimated_lambda_R(spec: &ProblemSpec) -> Result<f64> {
    estimate_lambda_R(&spec.resolvent, &lambda_grid(spec.partition.a()))
}

/// Report with λ_R from [`estimated_lambda_R`].
pub fn contraction_estimated(spec: &ProblemSpec) -> Result<ContractionReport> {
    let mut r = contraction_constant(spec, estimated_lambda_R(spec)?)?;
    r.lambda_R_source = LambdaSource::Estimated;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Nothing to check, e.g. A1 without a q value.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionItem {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub all_pass: bool,
    pub items: Vec<AssumptionItem>,
    pub contraction: ContractionReport,
}

impl AssumptionReport {
    pub fn item(&self, id: &str) -> Option<&AssumptionItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn failed(&self) -> Vec<&AssumptionItem> {
        self.items.iter().filter(|i| i.status == Status::Fail).collect()
    }
}

fn item(id: &str, ok: bool, detail: String) -> AssumptionItem {
    AssumptionItem {
        id: id.into(),
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

/// Pass/fail per assumption. Zero Lipschitz constants (constant h or ψ)
/// are accepted: they only make the bounds sharper.
#[allow(non_snake_case)]
pub fn assumption_checklist(spec: &ProblemSpec, lambda_R: f64) -> Result<AssumptionReport> {
    let contraction = contraction_constant(spec, lambda_R)?;
    assemble(spec, contraction)
}

/// Checklist with λ_R from [`estimated_lambda_R`].
pub fn assumption_checklist_estimated(spec: &ProblemSpec) -> Result<AssumptionReport> {
    assemble(spec, contraction_estimated(spec)?)
}

fn assemble(spec: &ProblemSpec, contraction: ContractionReport) -> Result<AssumptionReport> {
    let beta = spec.beta;
    let mut items = Vec::with_capacity(5);
    items.push(match spec.q_diag {
        None => AssumptionItem {
            id: "A1".into(),
            status: Status::Skipped,
            detail: "no q given".into(),
        },
        Some(q) => {
            let bound = 1.0 / (2.0 - beta);
            item("A1", q < bound, format!("q = {q}, bound 1/(2−β) = {bound}"))
        }
    });
    let lh = spec.lambda_h();
    items.push(item(
        "A2",
        lh.is_finite() && lh >= 0.0,
        format!("λ_h = {lh} (catalog constant)"),
    ));
    let lphi = &contraction.lambda_phi;
    let lpsi = &contraction.lambda_psi;
    let bad_phi: Vec<String> = (0..lphi.len())
        .filter(|&i| lphi[i] > 1.0 || lpsi[i] > 1.0)
        .map(|i| format!("j={}: λ_φ = {:.6e}, λ_ψ = {}", i + 1, lphi[i], lpsi[i]))
        .collect();
    items.push(item(
        "A3",
        bad_phi.is_empty(),
        if bad_phi.is_empty() {
            format!("λ_φ = {lphi:?} within (0, 1]")
        } else {
            format!("out of (0, 1]: {}", bad_phi.join("; "))
        },
    ));
    let bad_psi: Vec<String> = (0..lpsi.len())
        .filter(|&i| lpsi[i] > 1.0)
        .map(|i| format!("j={}: λ_ψ = {}", i + 1, lpsi[i]))
        .collect();
    items.push(item(
        "A4",
        bad_psi.is_empty(),
        if bad_psi.is_empty() {
            format!("φ_j = (u_j − t)^(1+β) ψ_j by construction, λ_ψ = {lpsi:?}")
        } else {
            format!("λ_ψ out of (0, 1]: {}", bad_psi.join("; "))
        },
    ));
    items.push(item(
        "A5",
        contraction.verdict,
        format!("c = {:.6} with λ_R = {:.6}", contraction.c, contraction.lambda_R),
    ));
    let all_pass = items.iter().all(|i| i.status != Status::Fail);
    Ok(AssumptionReport {
        all_pass,
        items,
        contraction,
    })
}
