//! Exact simulation of the particle system and its companion
//! finite-size approximations.

mod event_log;
mod master;
mod mlfe;
mod simulate;

pub use event_log::{empirical_measure, neighborhood_empirical_measure, Event, EventLog};
pub use master::MasterEquation;
pub use mlfe::{mlfe_ensemble, MlfeOptions, MlfeOutput};
pub use simulate::{replicate, sample_initial, simulate, SimOptions};
