//! The law of the root neighborhood on the local-limit tree: canonical
//! configuration enumeration, the coupled ODE system for the law, its
//! integrator, and mean-field baselines.

mod configs;
mod meanfield;
mod ode;
mod unreduced;

pub use configs::{ConfigSpace, NeighborhoodConfig, Slots, STAR};
pub use meanfield::{mean_field_complete, mean_field_ode, mean_field_rhs};
pub use ode::{psi_reference, LfOde, LfSolution};
pub use unreduced::OrderedSolver;
