//! The mild-solution operator Ξ on the piecewise timetable, the history
//! corrections Φ_j, the weighted norm of PC_{2−β} and Picard iteration.
//!
//! On a solve interval (u_j, t_{j+1}] each mode satisfies
//!
//! ```text
//! z(t) = ρ(t−u_j) I_j + K(t−u_j) z̃_j + ∫_{u_j}^t K(t−r) (h(r, z(r)) − Φ_j(r)) dr
//! ```
//!
//! with I_0 = z0, I_j the mean of φ_j(·, z(t_j⁻)) over (t_j, u_j], and on an
//! impulse interval z(t) = φ_j(t, z(t_j⁻)).

mod history;
mod solver;
mod trajectory;

pub use solver::{
    phi_correction, solve, ConvergenceReport, MeshConfig, MildSolver, ResidualReport,
    SegmentResidual, RESIDUAL_BOUNDARY_LAYER,
};
pub use trajectory::{pc_norm, Segment, SegmentKind, Trajectory};
