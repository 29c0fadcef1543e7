use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree distribution error: {0}")]
    Degree(String),

    #[error("degree sequence is not graphical")]
    NotGraphical,

    #[error("configuration model: rejection cap of {0} attempts exceeded")]
    RejectionCap(u64),

    #[error("model definition error: {0}")]
    Model(String),

    #[error("transition graph has a directed cycle through states {0:?}")]
    Cycle(Vec<i32>),

    #[error("rate bound violated: {0}")]
    RateBound(String),

    #[error("joint state space of size {0} exceeds cap {1}")]
    StateSpaceCap(usize, usize),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at {line}:{col}: {msg}")]
    ExprParse { line: usize, col: usize, msg: String },

    #[error("graph error: {0}")]
    Graph(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
