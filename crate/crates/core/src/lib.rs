//! Coupled Stuart-Landau oscillators with inhomogeneous coupling strengths:
//! simulation, mean-field self-consistency theory, state classification and
//! parameter sweeps.

pub mod cli;
pub mod error;
pub mod integrator;
pub mod model;
pub mod networks;
pub mod observables;
pub mod sweep;
pub mod theory;

pub use error::{Error, Result};
pub use integrator::{init_state, integrate, rk4_step, IntegrationPlan, Trajectory};
pub use model::{
    full_network_rhs, mean_field_rhs, polar_rhs, CouplingSet, EnsembleState, ModelParams, NetworkGraph, C64,
};
