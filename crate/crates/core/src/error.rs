use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("superluminal velocity at node {node:?}: eps*|v| = {value:.6e} >= 1")]
    Superluminal { node: [usize; 3], value: f64 },

    #[error("degenerate flow map at node {node:?}: J = {jacobian:.6e}")]
    DegenerateMap { node: [usize; 3], jacobian: f64 },

    #[error("invalid weight profile: {0}")]
    InvalidWeight(String),

    #[error("unsupported Hardy exponent k = {0}")]
    UnsupportedExponent(f64),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("simulation aborted at t = {time:.6e}: {reason}")]
    SimulationAborted {
        time: f64,
        reason: String,
        /// Everything recorded up to (and including) the last valid state.
        partial: Box<crate::solver::Trajectory>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
