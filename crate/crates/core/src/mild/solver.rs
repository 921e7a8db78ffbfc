use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::history::{ImpulseSource, SolveSource};
use super::trajectory::{pc_norm, Segment, SegmentKind, Trajectory};
use crate::error::{Error, Result};
use crate::fraccalc::{GradedMesh, NodeDerivative, NodeWeights};
use crate::problem::ProblemSpec;
use crate::resolvent::{double_convolution, ModeKernel, StateSamples};
use crate::special::gamma_fn;
use crate::state::SpectralState;

/// Nodes per segment and the grading exponent toward each left end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub solve_nodes: usize,
    pub impulse_nodes: usize,
    pub grading: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            solve_nodes: 256,
            impulse_nodes: 64,
            grading: 2.0,
        }
    }
}

/// Default relative width of the layer next to u_j left out of the residual.
pub const RESIDUAL_BOUNDARY_LAYER: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// pc_norm(z⁽ⁿ⁺¹⁾ − z⁽ⁿ⁾) per iteration
    pub differences: Vec<f64>,
    /// successive quotients of `differences`
    pub ratios: Vec<f64>,
    /// largest observed ratio, 0 when fewer than two iterations ran
    pub empirical_ratio: f64,
    pub converged: bool,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentResidual {
    pub index: usize,
    /// max over checked nodes of (t − u_j)^{2−β} ‖D^β z − (Az + h − Φ_j)‖
    pub max_weighted: f64,
    pub at: f64,
    pub checked_nodes: usize,
    /// end nodes plus nodes inside the boundary layer
    pub excluded_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub boundary_layer: f64,
    pub max_weighted: f64,
    pub segments: Vec<SegmentResidual>,
}

#[derive(Debug, Clone)]
struct SolvePlan {
    u: f64,
    nodes: Vec<f64>,
    /// (r_i − u)^σ
    weight: Vec<f64>,
    /// ρ_γ(r_i − u) and K_γ(r_i − u), row-major n × N
    rho: Vec<f64>,
    kint: Vec<f64>,
    /// per mode, concatenated rows of the convolution weights
    conv: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    /// Φ_j weights on solve intervals k < j and impulse sources p ≤ j
    hist_solve: Vec<DMatrix<f64>>,
    hist_impulse: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
struct ImpulsePlan {
    start: f64,
    end: f64,
    nodes: Vec<f64>,
    source: ImpulseSource,
}

/// Node values of one iterate that Ξ consumes.
struct Sources {
    solve: Vec<DMatrix<f64>>,
    /// ψ_p(s_q, z(t_p⁻)) at the impulse source points
    psi: Vec<DMatrix<f64>>,
    /// I_0 = z0, I_p = (1/(u_p − t_p)) ∫ φ_p(r, z(t_p⁻)) dr
    lead: Vec<SpectralState>,
    left: Vec<SpectralState>,
}

fn c_beta(beta: f64) -> Result<f64> {
    Ok(beta * (beta - 1.0) / gamma_fn(2.0 - beta)?)
}

/// Precomputed weights for one problem on one set of meshes.
#[derive(Debug, Clone)]
pub struct MildSolver {
    spec: ProblemSpec,
    config: MeshConfig,
    solves: Vec<SolvePlan>,
    impulses: Vec<ImpulsePlan>,
}

impl MildSolver {
    pub fn new(spec: &ProblemSpec, config: MeshConfig) -> Result<Self> {
        if config.solve_nodes < 8 || config.impulse_nodes < 8 {
            return Err(Error::domain("meshes need at least 8 nodes per segment"));
        }
        let beta = spec.beta;
        let sigma = 2.0 - beta;
        let p = &spec.partition;
        let m = p.m();
        let meshes: Vec<Vec<f64>> = (0..=m)
            .map(|j| {
                let (u, t) = p.solve_interval(j);
                Ok(GradedMesh::new(u, t, config.solve_nodes, config.grading)?.nodes())
            })
            .collect::<Result<_>>()?;
        let mut impulses = Vec::with_capacity(m);
        for (j, after) in meshes.iter().enumerate().skip(1) {
            let (start, end) = p.impulse_interval(j);
            let nodes = GradedMesh::new(start, end, config.impulse_nodes, config.grading)?.nodes();
            let finest = 0.25 * (after[0] - end);
            impulses.push(ImpulsePlan {
                start,
                end,
                nodes,
                source: ImpulseSource::new(start, end, beta, finest),
            });
        }
        let sources: Vec<SolveSource> = meshes
            .iter()
            .enumerate()
            .map(|(k, nodes)| SolveSource::new(p.u(k), nodes, sigma))
            .collect();
        let cb = c_beta(beta)?;
        let modes = spec.modes();
        let mut solves = Vec::with_capacity(m + 1);
        for (j, nodes) in meshes.into_iter().enumerate() {
            let u = p.u(j);
            let label = format!("solve {j}");
            let n = nodes.len();
            let mut rho = Vec::with_capacity(n * modes);
            let mut kint = Vec::with_capacity(n * modes);
            for &r in &nodes {
                rho.extend(spec.resolvent.resolvent_factors(r - u).map_err(|e| e.in_segment(&label))?);
                kint.extend(spec.resolvent.integrated_factors(r - u).map_err(|e| e.in_segment(&label))?);
            }
            let weights = NodeWeights::new(u, &nodes, beta, sigma).map_err(|e| e.in_segment(&label))?;
            let kernel = ModeKernel::new(beta, beta, spec.resolvent.op(), nodes[n - 1] - u)
                .map_err(|e| e.in_segment(&label))?;
            let mut offsets = vec![0];
            for i in 0..n {
                offsets.push(offsets[i] + weights.row(i).len());
            }
            let conv = (0..modes)
                .map(|mode| {
                    let mut flat = Vec::with_capacity(offsets[n]);
                    for (i, &ri) in nodes.iter().enumerate() {
                        for (l, w) in weights.row(i).iter().enumerate() {
                            flat.push(w * kernel.eval(mode, ri - nodes[l]));
                        }
                    }
                    flat
                })
                .collect();
            let hist_solve = sources[..j]
                .iter()
                .map(|src| {
                    let rows: Vec<Vec<f64>> = nodes.iter().map(|&r| src.row(r, beta)).collect();
                    DMatrix::from_fn(n, rows[0].len(), |i, l| cb * rows[i][l])
                })
                .collect();
            let hist_impulse = impulses[..j]
                .iter()
                .map(|imp| {
                    let rows: Vec<Vec<f64>> =
                        nodes.iter().map(|&r| imp.source.row(r, beta)).collect();
                    DMatrix::from_fn(n, rows[0].len(), |i, q| cb * rows[i][q])
                })
                .collect();
            solves.push(SolvePlan {
                u,
                weight: nodes.iter().map(|&r| (r - u).powf(sigma)).collect(),
                nodes,
                rho,
                kint,
                conv,
                offsets,
                hist_solve,
                hist_impulse,
            });
        }
        Ok(MildSolver {
            spec: spec.clone(),
            config,
            solves,
            impulses,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn config(&self) -> MeshConfig {
        self.config
    }

    fn modes(&self) -> usize {
        self.spec.modes()
    }

    fn check_meshes(&self, traj: &Trajectory) -> Result<()> {
        let m = self.spec.m();
        if traj.segments.len() != 2 * m + 1 || traj.modes() != self.modes() {
            return Err(Error::State("trajectory does not match the solver's layout".into()));
        }
        for (j, plan) in self.solves.iter().enumerate() {
            match traj.solve_segment(j) {
                Some(s) if s.times == plan.nodes => {}
                _ => return Err(Error::State(format!("solve {j}: mesh differs from the solver's"))),
            }
        }
        for (i, plan) in self.impulses.iter().enumerate() {
            match traj.impulse_segment(i + 1) {
                Some(s) if s.times == plan.nodes => {}
                _ => {
                    return Err(Error::State(format!(
                        "impulse {}: mesh differs from the solver's",
                        i + 1
                    )))
                }
            }
        }
        Ok(())
    }

    fn lead_for(&self, p: usize, left: &SpectralState) -> (DMatrix<f64>, SpectralState) {
        let plan = &self.impulses[p - 1];
        let psi = &self.spec.impulses[p - 1];
        let pts = &plan.source.points;
        let values = DMatrix::from_fn(pts.len(), self.modes(), |q, mode| {
            psi.eval(pts[q], mode, left[mode])
        });
        let len = plan.end - plan.start;
        let lead = (0..self.modes())
            .map(|mode| plan.source.integrate(values.column(mode).iter().copied()) / len)
            .collect();
        (values, SpectralState::new(lead).unwrap_or_else(|_| SpectralState::zeros(self.modes())))
    }

    fn impulse_segment(&self, p: usize, left: &SpectralState) -> Segment {
        let plan = &self.impulses[p - 1];
        Segment {
            kind: SegmentKind::Impulse,
            index: p,
            start: plan.start,
            end: plan.end,
            origin: self.spec.partition.u(p - 1),
            times: plan.nodes.clone(),
            states: plan.nodes.iter().map(|&s| self.spec.phi(p, s, left)).collect(),
        }
    }

    fn sources(&self, traj: &Trajectory) -> Result<Sources> {
        self.check_meshes(traj)?;
        let modes = self.modes();
        let solve = (0..self.solves.len())
            .map(|j| {
                let s = traj.solve_segment(j).expect("checked");
                DMatrix::from_fn(s.states.len(), modes, |i, mode| s.states[i][mode])
            })
            .collect();
        let mut psi = Vec::new();
        let mut lead = vec![self.spec.z0.clone()];
        let mut left = Vec::new();
        for p in 1..=self.spec.m() {
            let zl = traj.left_limit(p)?.clone();
            let (values, l) = self.lead_for(p, &zl);
            psi.push(values);
            lead.push(l);
            left.push(zl);
        }
        Ok(Sources {
            solve,
            psi,
            lead,
            left,
        })
    }

    /// Φ_j at the nodes of solve interval j, n × N.
    fn phi_nodes(&self, j: usize, src: &Sources) -> DMatrix<f64> {
        let plan = &self.solves[j];
        let mut phi = DMatrix::zeros(plan.nodes.len(), self.modes());
        for (h, z) in plan.hist_solve.iter().zip(&src.solve) {
            phi.gemm(1.0, h, z, 1.0);
        }
        for (h, v) in plan.hist_impulse.iter().zip(&src.psi) {
            phi.gemm(1.0, h, v, 1.0);
        }
        phi
    }

    /// ρ(t − u_j) I_j + K(t − u_j) z̃_j at the nodes, plus the convolution of
    /// `forcing` (row-major n × N, already weighted by (r − u_j)^σ).
    fn solve_states(&self, j: usize, lead: &SpectralState, forcing: Option<&[f64]>) -> Vec<SpectralState> {
        let plan = &self.solves[j];
        let modes = self.modes();
        let zt = &self.spec.ztilde[j];
        (0..plan.nodes.len())
            .map(|i| {
                let coeffs = (0..modes)
                    .map(|mode| {
                        let k = i * modes + mode;
                        let mut v = plan.rho[k] * lead[mode] + plan.kint[k] * zt[mode];
                        if let Some(y) = forcing {
                            let row = &plan.conv[mode][plan.offsets[i]..plan.offsets[i + 1]];
                            v += row
                                .iter()
                                .enumerate()
                                .map(|(l, w)| w * y[l * modes + mode])
                                .sum::<f64>();
                        }
                        v
                    })
                    .collect();
                SpectralState::new(coeffs).unwrap_or_else(|_| SpectralState::zeros(modes))
            })
            .collect()
    }

    fn solve_segment(&self, j: usize, states: Vec<SpectralState>) -> Segment {
        let plan = &self.solves[j];
        Segment {
            kind: SegmentKind::Solve,
            index: j,
            start: plan.u,
            end: *plan.nodes.last().expect("non-empty"),
            origin: plan.u,
            times: plan.nodes.clone(),
            states,
        }
    }

    fn check_finite(traj: &Trajectory) -> Result<()> {
        for s in &traj.segments {
            if s.states.iter().any(|z| z.coeffs().iter().any(|c| !c.is_finite())) {
                return Err(Error::Accuracy {
                    message: format!("{}: non-finite samples", s.label()),
                    best: f64::NAN,
                }
                .in_segment(s.label()));
            }
        }
        Ok(())
    }

    /// Segmentwise homogeneous trajectory: data terms only, h and Φ dropped,
    /// each I_j taken from the left limit of the previous piece.
    pub fn initial_guess(&self) -> Trajectory {
        let mut segments = Vec::with_capacity(2 * self.spec.m() + 1);
        let mut lead = self.spec.z0.clone();
        for j in 0..self.solves.len() {
            if j > 0 {
                let left = segments
                    .last()
                    .map(|s: &Segment| s.last().clone())
                    .expect("previous solve interval");
                segments.push(self.impulse_segment(j, &left));
                lead = self.lead_for(j, &left).1;
            }
            segments.push(self.solve_segment(j, self.solve_states(j, &lead, None)));
        }
        Trajectory {
            beta: self.spec.beta,
            segments,
        }
    }

    /// One application of Ξ. Impulse pieces use the input's left limits.
    pub fn apply_xi(&self, traj: &Trajectory) -> Result<Trajectory> {
        let src = self.sources(traj)?;
        let modes = self.modes();
        let mut segments = Vec::with_capacity(traj.segments.len());
        for j in 0..self.solves.len() {
            if j > 0 {
                segments.push(self.impulse_segment(j, &src.left[j - 1]));
            }
            let plan = &self.solves[j];
            let input = traj.solve_segment(j).expect("checked");
            let forcing = if j == 0 && self.spec.h.is_zero() {
                None
            } else {
                let phi = self.phi_nodes(j, &src);
                let mut y = vec![0.0; plan.nodes.len() * modes];
                for (i, (&r, z)) in plan.nodes.iter().zip(&input.states).enumerate() {
                    for mode in 0..modes {
                        let h = self.spec.h.eval(r, z[mode]);
                        y[i * modes + mode] = plan.weight[i] * (h - phi[(i, mode)]);
                    }
                }
                Some(y)
            };
            let states = self.solve_states(j, &src.lead[j], forcing.as_deref());
            segments.push(self.solve_segment(j, states));
        }
        let out = Trajectory {
            beta: self.spec.beta,
            segments,
        };
        Self::check_finite(&out)?;
        Ok(out)
    }

    /// Picard iteration from [`MildSolver::initial_guess`].
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<(Trajectory, ConvergenceReport)> {
        self.solve_from(self.initial_guess(), tol, max_iter)
    }

    /// Picard iteration z⁽ⁿ⁺¹⁾ = Ξ z⁽ⁿ⁾ until pc_norm(z⁽ⁿ⁺¹⁾ − z⁽ⁿ⁾) < tol.
    /// The impulse pieces of the result are refreshed from its own left limits.
    pub fn solve_from(
        &self,
        guess: Trajectory,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Trajectory, ConvergenceReport)> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::domain(format!("tol = {tol} must be positive")));
        }
        if max_iter == 0 {
            return Err(Error::domain("max_iter must be at least 1"));
        }
        let mut z = guess;
        let mut differences = Vec::new();
        for _ in 0..max_iter {
            let next = self.apply_xi(&z)?;
            differences.push(pc_norm(&next.difference(&z)?)?);
            z = next;
            if *differences.last().expect("pushed") < tol {
                let ratios = ratios(&differences);
                let report = ConvergenceReport {
                    iterations: differences.len(),
                    empirical_ratio: ratios.iter().copied().fold(0.0, f64::max),
                    ratios,
                    differences,
                    converged: true,
                    tol,
                };
                return Ok((self.refresh_impulses(z)?, report));
            }
        }
        Err(Error::NonConvergence {
            iterations: differences.len(),
            last_difference: *differences.last().expect("max_iter ≥ 1"),
            ratios: ratios(&differences),
        })
    }

    fn refresh_impulses(&self, mut traj: Trajectory) -> Result<Trajectory> {
        for p in 1..=self.spec.m() {
            let left = traj.left_limit(p)?.clone();
            let fresh = self.impulse_segment(p, &left);
            let slot = traj
                .segments
                .iter_mut()
                .find(|s| s.kind == SegmentKind::Impulse && s.index == p)
                .ok_or_else(|| Error::State(format!("impulse {p} is missing")))?;
            *slot = fresh;
        }
        Ok(traj)
    }

    /// Φ_j at every node of solve interval j, using the solver's quadratures.
    pub fn phi_at_nodes(&self, traj: &Trajectory, j: usize) -> Result<Vec<SpectralState>> {
        if j >= self.solves.len() {
            return Err(Error::domain(format!("no solve interval {j}")));
        }
        let src = self.sources(traj)?;
        let phi = self.phi_nodes(j, &src);
        (0..phi.nrows())
            .map(|i| SpectralState::new(phi.row(i).iter().copied().collect()))
            .collect()
    }

    /// z(t) at any t ∈ (0, a]: node values where available, the mild formula
    /// with the sampled forcing between nodes, φ_j on impulse intervals.
    pub fn evaluate(&self, traj: &Trajectory, t: f64) -> Result<SpectralState> {
        let seg = traj
            .segment_at(t)
            .ok_or_else(|| Error::domain(format!("t = {t} lies outside the trajectory")))?;
        if let Some(i) = seg.times.iter().position(|&x| x == t) {
            return Ok(seg.states[i].clone());
        }
        let j = seg.index;
        if seg.kind == SegmentKind::Impulse {
            return Ok(self.spec.phi(j, t, traj.left_limit(j)?));
        }
        let src = self.sources(traj)?;
        let phi = self.phi_nodes(j, &src);
        let plan = &self.solves[j];
        let g: Vec<SpectralState> = seg
            .times
            .iter()
            .zip(&seg.states)
            .enumerate()
            .map(|(i, (&r, z))| {
                let mut v = self.spec.h.apply(r, z);
                for (mode, c) in v.coeffs_mut().iter_mut().enumerate() {
                    *c -= phi[(i, mode)];
                }
                v
            })
            .collect();
        let samples = StateSamples::new(plan.u, seg.times.clone(), g, 2.0 - self.spec.beta)?;
        let res = &self.spec.resolvent;
        let s = t - plan.u;
        let mut z = src.lead[j].hadamard(&res.resolvent_factors(s)?);
        z = &z + &self.spec.ztilde[j].hadamard(&res.integrated_factors(s)?);
        Ok(&z + &double_convolution(res, plan.u, t, &samples)?)
    }

    /// Residual of _{u_j}D^β z = Az + h − Φ_j at interior nodes of every
    /// solve interval, with [`RESIDUAL_BOUNDARY_LAYER`].
    pub fn residual_check(&self, traj: &Trajectory) -> Result<ResidualReport> {
        self.residual_check_with(traj, RESIDUAL_BOUNDARY_LAYER)
    }

    /// As [`MildSolver::residual_check`], leaving out nodes with
    /// t − u_j < `layer`·(t_{j+1} − u_j). The three-point stencil on a graded
    /// mesh has a weighted error of order 1/i² at node i whatever the mesh
    /// size, so the first nodes never resolve the singular leading term.
    pub fn residual_check_with(&self, traj: &Trajectory, layer: f64) -> Result<ResidualReport> {
        if !(0.0..1.0).contains(&layer) {
            return Err(Error::domain(format!("boundary layer {layer} must lie in [0, 1)")));
        }
        let src = self.sources(traj)?;
        let beta = self.spec.beta;
        let sigma = 2.0 - beta;
        let modes = self.modes();
        let eig = self.spec.resolvent.op().eigenvalues();
        let mut segments = Vec::with_capacity(self.solves.len());
        for (j, plan) in self.solves.iter().enumerate() {
            let label = format!("solve {j}");
            let seg = traj.solve_segment(j).expect("checked");
            let n = plan.nodes.len();
            let deriv = NodeDerivative::new(plan.u, &plan.nodes, beta, sigma)
                .map_err(|e| e.in_segment(&label))?;
            let d: Vec<Vec<f64>> = (0..modes)
                .map(|mode| {
                    let vals: Vec<f64> = seg.states.iter().map(|z| z[mode]).collect();
                    deriv.apply(&vals)
                })
                .collect();
            let phi = self.phi_nodes(j, &src);
            let len = plan.nodes[n - 1] - plan.u;
            let mut worst = (0.0f64, plan.nodes[n - 1]);
            let mut checked = 0;
            for i in 1..n - 1 {
                let r = plan.nodes[i];
                if r - plan.u < layer * len {
                    continue;
                }
                checked += 1;
                let z = &seg.states[i];
                let defect: Vec<f64> = (0..modes)
                    .map(|mode| {
                        let rhs = eig[mode] * z[mode] + self.spec.h.eval(r, z[mode]) - phi[(i, mode)];
                        d[mode][i - 1] - rhs
                    })
                    .collect();
                let w = plan.weight[i] * SpectralState::new(defect)?.norm();
                if w > worst.0 || w.is_nan() {
                    worst = (w, r);
                }
            }
            segments.push(SegmentResidual {
                index: j,
                max_weighted: worst.0,
                at: worst.1,
                checked_nodes: checked,
                excluded_nodes: n - checked,
            });
        }
        Ok(ResidualReport {
            boundary_layer: layer,
            max_weighted: segments.iter().map(|s| s.max_weighted).fold(0.0, f64::max),
            segments,
        })
    }
}

fn ratios(d: &[f64]) -> Vec<f64> {
    d.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect()
}

/// Picard iteration with the default meshes.
pub fn solve(spec: &ProblemSpec, tol: f64, max_iter: usize) -> Result<(Trajectory, ConvergenceReport)> {
    MildSolver::new(spec, MeshConfig::default())?.solve(tol, max_iter)
}

/// Φ_j(t) for t ∈ (u_j, t_{j+1}], built from the samples of `traj` on the
/// earlier intervals. The impulse pieces use ψ at the left limits
/// z(t_p⁻) of `traj`, so that ((u_p − s)/(t − s))^{1+β} stays bounded.
pub fn phi_correction(spec: &ProblemSpec, traj: &Trajectory, j: usize, t: f64) -> Result<SpectralState> {
    let modes = spec.modes();
    if j == 0 {
        return Ok(SpectralState::zeros(modes));
    }
    if j > spec.m() {
        return Err(Error::domain(format!("no solve interval {j}")));
    }
    let p = &spec.partition;
    let (u, end) = p.solve_interval(j);
    if !(t > u && t <= end) {
        return Err(Error::domain(format!("t = {t} outside ({u}, {end}]")));
    }
    let beta = spec.beta;
    let cb = c_beta(beta)?;
    let mut acc = vec![0.0; modes];
    for k in 0..j {
        let seg = traj
            .solve_segment(k)
            .ok_or_else(|| Error::State(format!("solve interval {k} is missing")))?;
        if seg.times.len() < 2 {
            return Err(Error::State(format!("solve interval {k} needs two samples")));
        }
        let row = SolveSource::new(seg.start, &seg.times, 2.0 - beta).row(t, beta);
        for (w, z) in row.iter().zip(&seg.states) {
            for (a, c) in acc.iter_mut().zip(z.coeffs()) {
                *a += w * c;
            }
        }
        let imp = k + 1;
        let left = traj.left_limit(imp)?;
        let (start, stop) = p.impulse_interval(imp);
        let src = ImpulseSource::new(start, stop, beta, 0.25 * (t - stop));
        let row = src.row(t, beta);
        let psi = &spec.impulses[imp - 1];
        for (mode, a) in acc.iter_mut().enumerate() {
            *a += row
                .iter()
                .zip(&src.points)
                .map(|(w, &s)| w * psi.eval(s, mode, left[mode]))
                .sum::<f64>();
        }
    }
    SpectralState::new(acc.into_iter().map(|a| cb * a).collect())
}
