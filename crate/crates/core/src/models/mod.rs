//! Rate-function interface, transition-graph checks, the builtin model
//! catalog, and parsing of user-supplied model configs.

mod builtins;
mod config;
mod expr;
mod spec;
mod transition;

pub use builtins::builtin;
pub use config::{build_model, parse_model_config, ModelDoc, RateEntry};
pub use expr::{EvalCtx, Expr};
pub use spec::{CompleteRateFn, Mark, ModelSpec, RateBoundFn, RateFn};
pub use transition::{
    check_acyclic, reachable, transition_graph, TransitionGraph, DEFAULT_PROBE_COUNT,
};
