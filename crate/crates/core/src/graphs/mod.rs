//! Degree distributions, configuration-model sampling, unimodular
//! Galton–Watson trees, and empirical degree statistics.

mod config_model;
mod degree;
mod graph;
mod ugw;

pub use config_model::{
    sample_configuration_model, sample_degrees, validate_graphical, CmMode, DEFAULT_REJECTION_CAP,
};
pub use degree::DegreeDistribution;
pub use graph::Graph;
pub use ugw::{sample_ugw, RootedTree};
