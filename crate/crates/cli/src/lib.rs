//! Experiment orchestration behind the `netdyn` binary: config parsing,
//! the simulate/solve/compare pipelines, and CSV/SVG emission.

pub mod csvio;
pub mod experiment;
pub mod pipeline;
pub mod svg;

pub use experiment::{ExperimentSpec, GraphSource};
pub use pipeline::{run_check, run_compare, run_mlfe, run_simulate, run_solve, Overrides};
