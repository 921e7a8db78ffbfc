use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::SpectralState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Solve,
    Impulse,
}

impl SegmentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentKind::Solve => "solve",
            SegmentKind::Impulse => "impulse",
        }
    }
}

/// Samples of z on one solve interval (u_j, t_{j+1}] or impulse interval
/// (t_j, u_j]. The interval is open on the left; `times` ends at `end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub index: usize,
    pub start: f64,
    pub end: f64,
    /// Origin of the norm weight (t − origin)^{2−β}: u_j for solve interval j,
    /// u_{j−1} for impulse interval j.
    pub origin: f64,
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
}

impl Segment {
    pub fn label(&self) -> String {
        format!("{} {}", self.kind.as_str(), self.index)
    }

    pub fn last(&self) -> &SpectralState {
        self.states.last().expect("segments are non-empty")
    }

    /// max over nodes of (t − origin)^{2−β} ‖z(t)‖.
    pub fn weighted_sup(&self, beta: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, z)| (t - self.origin).powf(2.0 - beta) * z.norm())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::State(format!("{}: {m}", self.label())));
        if self.times.is_empty() || self.times.len() != self.states.len() {
            return bad("needs matching, non-empty times and states");
        }
        if !(self.origin <= self.start && self.start < self.end) {
            return bad("origin ≤ start < end violated");
        }
        if self.times[0] <= self.start
            || self.times.windows(2).any(|w| !(w[1] > w[0]))
            || *self.times.last().expect("non-empty") > self.end
        {
            return bad("times must increase strictly inside (start, end]");
        }
        let modes = self.states[0].modes();
        if self.states.iter().any(|s| s.modes() != modes) {
            return bad("states have differing mode counts");
        }
        Ok(())
    }
}

/// A sampled piecewise trajectory, ordered solve 0, impulse 1, solve 1, …
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub beta: f64,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn new(beta: f64, segments: Vec<Segment>) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::domain(format!("beta = {beta} must lie in (1, 2)")));
        }
        for s in &segments {
            s.validate()?;
        }
        if let Some(first) = segments.first() {
            let modes = first.states[0].modes();
            if segments.iter().any(|s| s.states[0].modes() != modes) {
                return Err(Error::State("segments have differing mode counts".into()));
            }
        }
        Ok(Trajectory { beta, segments })
    }

    pub fn modes(&self) -> usize {
        self.segments.first().map_or(0, |s| s.states[0].modes())
    }

    fn find(&self, kind: SegmentKind, j: usize) -> Option<&Segment> {
        self.segments.iter().find(|s| s.kind == kind && s.index == j)
    }

    pub fn solve_segment(&self, j: usize) -> Option<&Segment> {
        self.find(SegmentKind::Solve, j)
    }

    pub fn impulse_segment(&self, j: usize) -> Option<&Segment> {
        self.find(SegmentKind::Impulse, j)
    }

    /// z(t_j⁻) for j ≥ 1: the sample at t_j, the last node of solve interval j − 1.
    pub fn left_limit(&self, j: usize) -> Result<&SpectralState> {
        if j == 0 {
            return Err(Error::domain("left limits exist for j ≥ 1"));
        }
        self.solve_segment(j - 1)
            .map(Segment::last)
            .ok_or_else(|| Error::State(format!("solve interval {} is missing", j - 1)))
    }

    /// The segment whose interval (start, end] contains t.
    pub fn segment_at(&self, t: f64) -> Option<&Segment> {
        self.segments.iter().find(|s| t > s.start && t <= s.end)
    }

    /// Nodewise difference of two trajectories on the same meshes.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.segments.len() != other.segments.len() {
            return Err(Error::State("trajectories have different segment counts".into()));
        }
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| {
                if a.kind != b.kind || a.index != b.index || a.times != b.times {
                    return Err(Error::State(format!("{}: meshes differ", a.label())));
                }
                let mut d = a.clone();
                for (x, y) in d.states.iter_mut().zip(&b.states) {
                    *x = &*x - y;
                }
                Ok(d)
            })
            .collect::<Result<_>>()?;
        Ok(Trajectory {
            beta: self.beta,
            segments,
        })
    }
}

/// max over all segments of the weighted sup (t − origin)^{2−β} ‖z(t)‖ at
/// the mesh nodes.
pub fn pc_norm(traj: &Trajectory) -> Result<f64> {
    if traj.segments.is_empty() {
        return Err(Error::domain("empty trajectory"));
    }
    Ok(traj
        .segments
        .iter()
        .map(|s| s.weighted_sup(traj.beta))
        .fold(0.0, f64::max))
}
