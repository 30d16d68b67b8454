//! Mean-field self-consistency theory of the stationary states.
//!
//! A coupling scale `S ≠ 1` is handled by replacing every `K_j` with `S K_j`
//! before the formulas are applied.

mod amplitude;
mod classify;
mod contributions;
mod predict;
mod solver;

pub use amplitude::{
    amplitude_derivative, fixed_point_residuals, is_locked, locked_phase, phase_derivative, phi_slope_sign,
    r_slope_sign, r_slope_sign_exact, solve_amplitude, Amplitude,
};
pub use classify::{
    classify_observed, classify_state, classify_with_ends, legal_rows, AmpSlope, EndPoints, Major, ObservedEnds, Pattern, StateLabel, IN_PHASE_DELTA,
    TIE_TOL,
};
pub use contributions::{
    contributions, drift_contribution, locked_contribution, locked_contribution_integrand, locking_range,
    Contributions, Membership,
};
pub use predict::{lock_interval, lock_margin, locking_boundaries, predict_point, PredictedPoint, PredictedProfileRow};
pub use solver::{self_consistency_residual, solve_self_consistency, SelfConsistentSolution, SolverOptions};
