use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid formula: {0}")]
    Formula(String),

    #[error("expansion of {goal} failed: {msg}")]
    Expansion { goal: String, msg: String },

    #[error("factoring did not converge: {0}")]
    FactoringDiverged(String),

    #[error("alternation detected: {0}")]
    Alternation(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
