//! Problem documents in JSON, trajectory CSV and JSON reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mild::Trajectory;
use crate::problem::{ProblemDocument, ProblemSpec};

const VALIDATION_PREFIX: &str = "validation error: ";

/// Parses and validates a problem document. Schema errors carry the JSON
/// path of the offending field.
pub fn parse_problem_str(text: &str) -> Result<ProblemSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ProblemDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = match e.path().to_string() {
            p if p == "." => "$".to_string(),
            p => format!("$.{p}"),
        };
        let message = e.inner().to_string();
        match message.strip_prefix(VALIDATION_PREFIX) {
            // raised by the partition's own ordering check
            Some(rest) => Error::Validation(format!("{path}: {rest}")),
            None => Error::Parse { path, message },
        }
    })?;
    ProblemSpec::from_document(&doc)
}

pub fn parse_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_problem_str(&text)
}

pub fn problem_to_json(spec: &ProblemSpec) -> Result<String> {
    to_json(&spec.to_document())
}

/// Pretty JSON with a trailing newline. Keys follow struct declaration order.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// What the trajectory CSV holds after `segment_index, segment_kind, t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvView {
    /// w_1..w_N
    Spectral,
    /// z(t, v_k) at `points` equally spaced v_k in [0, π]
    Physical { points: usize },
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, view: CsvView, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["segment_index".to_string(), "segment_kind".into(), "t".into()];
    match view {
        CsvView::Spectral => header.extend((1..=traj.modes()).map(|g| format!("w{g}"))),
        CsvView::Physical { points } => {
            if points < 2 {
                return Err(Error::domain("the physical grid needs at least 2 points"));
            }
            header.extend((0..points).map(|k| {
                format!("v{}", std::f64::consts::PI * k as f64 / (points - 1) as f64)
            }))
        }
    }
    w.write_record(&header).map_err(io)?;
    for seg in &traj.segments {
        for (t, z) in seg.times.iter().zip(&seg.states) {
            let values = match view {
                CsvView::Spectral => z.coeffs().to_vec(),
                CsvView::Physical { points } => z.to_physical(points),
            };
            let mut row = vec![seg.index.to_string(), seg.kind.as_str().to_string(), t.to_string()];
            row.extend(values.iter().map(f64::to_string));
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn trajectory_csv(traj: &Trajectory, view: CsvView) -> Result<String> {
    let mut buf = Vec::new();
    write_trajectory_csv(traj, view, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}
