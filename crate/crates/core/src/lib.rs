//! Interacting particle systems on sparse graphs: exact event-driven
//! simulation, and the finite ODE system describing the law of a root
//! particle and its neighbors on the local-limit tree.
//!
//! - [`graphs`]: degree distributions, configuration-model and
//!   Galton–Watson tree samplers.
//! - [`models`]: rate-function interface, transition-graph checks, and
//!   the builtin model catalog.
//! - [`sim`]: exact thinned simulation, observables, a master-equation
//!   oracle for tiny graphs, and the local-field ensemble simulator.
//! - [`lfode`]: neighborhood-configuration enumeration, the coupled law
//!   ODE, its integrator, and the mean-field baseline.

pub mod error;
pub mod graphs;
pub mod integrate;
pub mod lfode;
pub mod models;
pub mod parallel;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
