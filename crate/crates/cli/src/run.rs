use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nipfrac::analysis::{assumption_checklist_estimated, AssumptionReport};
use nipfrac::io::{parse_problem, to_json, write_trajectory_csv, CsvView};
use nipfrac::mild::{ConvergenceReport, MeshConfig, MildSolver, ResidualReport, Trajectory};
use nipfrac::problem::{example_problem, ProblemSpec, EXAMPLE_DELTA, EXAMPLE_MODES};
use nipfrac::Error;
use serde::Serialize;
use serde_json::json;

use crate::identities;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSUMPTION: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    Check,
    VerifyIdentities,
    ReproduceExample,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub problem: Option<PathBuf>,
    pub out: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
    pub mesh_nodes: Option<usize>,
    pub grading: Option<f64>,
    pub modes: Option<usize>,
    pub physical_grid: Option<usize>,
}

impl RunConfig {
    pub fn identities(out: PathBuf) -> Self {
        RunConfig {
            command: CommandKind::VerifyIdentities,
            problem: None,
            out,
            tol: 1e-8,
            max_iter: 1,
            mesh_nodes: None,
            grading: None,
            modes: None,
            physical_grid: None,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.out.as_os_str().is_empty() {
            return bad("--out must not be empty".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("--tol {} must be positive", self.tol));
        }
        if self.max_iter == 0 {
            return bad("--max-iter must be at least 1".into());
        }
        if self.modes == Some(0) {
            return bad("--modes must be at least 1".into());
        }
        if let Some(g) = self.grading {
            if !(g >= 1.0 && g.is_finite()) {
                return bad(format!("--grading {g} must be at least 1"));
            }
        }
        if let Some(k) = self.physical_grid {
            if k < 2 {
                return bad(format!("--physical-grid {k} needs at least 2 points"));
            }
        }
        Ok(())
    }

    fn mesh(&self) -> MeshConfig {
        let mut mesh = MeshConfig::default();
        if let Some(k) = self.mesh_nodes {
            mesh.solve_nodes = k;
            mesh.impulse_nodes = (k / 4).max(8);
        }
        if let Some(g) = self.grading {
            mesh.grading = g;
        }
        mesh
    }

    fn view(&self) -> CsvView {
        match self.physical_grid {
            Some(points) => CsvView::Physical { points },
            None => CsvView::Spectral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    AssumptionFailure,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => EXIT_OK,
            Outcome::AssumptionFailure => EXIT_ASSUMPTION,
        }
    }
}

/// Contents of convergence.json.
#[derive(Debug, Serialize)]
struct ConvergenceDoc {
    converged: bool,
    assumptions_pass: bool,
    /// the solve ran although the checklist failed
    flagged: bool,
    tol: f64,
    max_iter: usize,
    modes: usize,
    mesh: MeshConfig,
    iterations: usize,
    differences: Vec<f64>,
    ratios: Vec<f64>,
    empirical_ratio: f64,
    contraction_constant: f64,
    residual: Option<ResidualReport>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct ImpulseCheck {
    j: usize,
    t_j: f64,
    u_j: f64,
    left_limit_norm: f64,
    /// max over impulse nodes of ‖z(t) − φ_j(t, z(t_j⁻))‖
    identity_defect: f64,
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))?;
    match config.command {
        CommandKind::VerifyIdentities => verify(config),
        CommandKind::Check => {
            let spec = load(config)?;
            let report = check(config, &spec)?;
            Ok(verdict(&report, false))
        }
        CommandKind::Solve | CommandKind::ReproduceExample => {
            let spec = load(config)?;
            if config.command == CommandKind::ReproduceExample {
                write(&config.out.join("problem.json"), &to_json(&spec.to_document())?)?;
            }
            let report = check(config, &spec)?;
            solve(config, &spec, &report)?;
            Ok(verdict(&report, true))
        }
    }
}

fn load(config: &RunConfig) -> Result<ProblemSpec> {
    let spec = match (&config.problem, config.command) {
        (Some(p), _) => parse_problem(p)?,
        (None, CommandKind::ReproduceExample) => example_problem(EXAMPLE_DELTA, EXAMPLE_MODES)?,
        (None, _) => return Err(Error::Validation("--problem is required".into()).into()),
    };
    Ok(match config.modes {
        Some(n) => spec.with_modes(n)?,
        None => spec,
    })
}

fn check(config: &RunConfig, spec: &ProblemSpec) -> Result<AssumptionReport> {
    let report = assumption_checklist_estimated(spec)?;
    write(&config.out.join("contraction.json"), &to_json(&report.contraction)?)?;
    write(&config.out.join("assumptions.json"), &to_json(&report)?)?;
    let c = &report.contraction;
    println!(
        "c = {:.6} (lambda_R = {:.6}, {}), assumptions {}",
        c.c,
        c.lambda_R,
        if c.verdict { "contraction" } else { "no contraction" },
        if report.all_pass { "pass" } else { "fail" }
    );
    Ok(report)
}

fn verdict(report: &AssumptionReport, solved: bool) -> Outcome {
    if report.all_pass {
        return Outcome::Success;
    }
    let failed: Vec<_> = report
        .failed()
        .iter()
        .map(|i| json!({ "id": i.id, "detail": i.detail }))
        .collect();
    eprintln!(
        "{}",
        json!({
            "status": "assumption_failure",
            "failed": failed,
            "c": report.contraction.c,
            "solve_attempted": solved,
        })
    );
    Outcome::AssumptionFailure
}

/// Runs Picard iteration and writes the trajectory and convergence report.
/// A numerical failure is an error unless the checklist already failed, in
/// which case it is recorded and the assumption failure decides the exit.
fn solve(config: &RunConfig, spec: &ProblemSpec, report: &AssumptionReport) -> Result<()> {
    let mesh = config.mesh();
    let mut doc = ConvergenceDoc {
        converged: false,
        assumptions_pass: report.all_pass,
        flagged: !report.all_pass,
        tol: config.tol,
        max_iter: config.max_iter,
        modes: spec.modes(),
        mesh,
        iterations: 0,
        differences: Vec::new(),
        ratios: Vec::new(),
        empirical_ratio: 0.0,
        contraction_constant: report.contraction.c,
        residual: None,
        error: None,
    };
    let outcome = MildSolver::new(spec, mesh).and_then(|s| {
        let (traj, conv) = s.solve(config.tol, config.max_iter)?;
        Ok((s, traj, conv))
    });
    let (solver, traj, conv) = match outcome {
        Ok(x) => x,
        Err(e) => {
            if let Error::NonConvergence { iterations, ratios, .. } = &e {
                doc.iterations = *iterations;
                doc.ratios = ratios.clone();
            }
            doc.error = Some(e.to_string());
            write(&config.out.join("convergence.json"), &to_json(&doc)?)?;
            if report.all_pass {
                return Err(e.into());
            }
            eprintln!("{}", diagnostic(&e.into()));
            return Ok(());
        }
    };
    fill(&mut doc, &conv);
    doc.residual = solver.residual_check(&traj).ok();
    let path = config.out.join("trajectory.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_trajectory_csv(&traj, config.view(), std::io::BufWriter::new(file))?;
    write(&config.out.join("convergence.json"), &to_json(&doc)?)?;
    println!(
        "converged in {} iterations (last difference {:.3e}, largest ratio {:.3e})",
        conv.iterations,
        conv.differences.last().copied().unwrap_or(0.0),
        conv.empirical_ratio
    );
    if config.command == CommandKind::ReproduceExample {
        let checks = impulse_checks(spec, &traj)?;
        write(&config.out.join("impulses.json"), &to_json(&checks)?)?;
    }
    Ok(())
}

fn fill(doc: &mut ConvergenceDoc, conv: &ConvergenceReport) {
    doc.converged = conv.converged;
    doc.iterations = conv.iterations;
    doc.differences = conv.differences.clone();
    doc.ratios = conv.ratios.clone();
    doc.empirical_ratio = conv.empirical_ratio;
}

fn impulse_checks(spec: &ProblemSpec, traj: &Trajectory) -> Result<Vec<ImpulseCheck>> {
    let mut out = Vec::with_capacity(spec.m());
    for j in 1..=spec.m() {
        let left = traj.left_limit(j)?;
        let seg = traj
            .impulse_segment(j)
            .ok_or_else(|| Error::State(format!("impulse {j} is missing")))?;
        let defect = seg
            .times
            .iter()
            .zip(&seg.states)
            .map(|(&t, z)| (z - &spec.phi(j, t, left)).norm())
            .fold(0.0, f64::max);
        let (t_j, u_j) = spec.partition.impulse_interval(j);
        out.push(ImpulseCheck {
            j,
            t_j,
            u_j,
            left_limit_norm: left.norm(),
            identity_defect: defect,
        });
    }
    Ok(out)
}

fn verify(config: &RunConfig) -> Result<Outcome> {
    let rows = identities::run_all();
    write(&config.out.join("identities.json"), &to_json(&rows)?)?;
    let table = identities::table(&rows);
    write(&config.out.join("identities.txt"), &table)?;
    print!("{table}");
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    if failed.is_empty() {
        return Ok(Outcome::Success);
    }
    let names: Vec<&str> = failed.iter().map(|r| r.name.as_str()).collect();
    Err(Error::Accuracy {
        message: format!("identities failed: {}", names.join("; ")),
        best: failed.iter().map(|r| r.error).fold(0.0, f64::max),
    }
    .into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// One-line JSON diagnostic for stderr.
pub fn diagnostic(e: &anyhow::Error) -> String {
    let Some(err) = e.downcast_ref::<Error>() else {
        return json!({ "status": "error", "kind": "io", "message": format!("{e:#}") }).to_string();
    };
    let kind = match err {
        Error::Domain(_) => "domain",
        Error::Accuracy { .. } => "accuracy",
        Error::Stencil(_) => "stencil",
        Error::State(_) => "state",
        Error::Extrapolation(_) => "extrapolation",
        Error::Validation(_) => "validation",
        Error::Io(_) => "io",
        Error::Parse { .. } => "parse",
        Error::NonConvergence { .. } => "non_convergence",
        Error::Segment { .. } => "segment",
    };
    let mut v = json!({ "status": "error", "kind": kind, "message": err.to_string() });
    match err {
        Error::Parse { path, .. } => v["path"] = json!(path),
        Error::NonConvergence { iterations, ratios, .. } => {
            v["iterations"] = json!(iterations);
            v["ratios"] = json!(ratios);
        }
        _ => {}
    }
    v.to_string()
}
