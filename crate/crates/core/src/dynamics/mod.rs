//! Time evolution of every model family and the diagnostics that certify
//! integrability along trajectories: Lax residuals, conserved spectral
//! invariants, constraint drift and the rank gap of block spin matrices.

pub mod diagnostics;
pub mod integrate;
pub mod state;

pub use diagnostics::{
    admissible_point, default_spectral_points, invariant_drift, lax_residual, rank_gap,
    spectral_invariants, DEFAULT_FD_STEP, SPECTRAL_EXCLUSION,
};
pub use integrate::{
    integrate, rk4_step, Diagnostics, DiagnosticsConfig, IntegrateError, IntegratorConfig,
    Trajectory, TrajectoryTable,
};
pub use state::{Family, ModelState};
