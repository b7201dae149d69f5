use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario dimensions must all be at least 1")]
    EmptyScenario,

    #[error("tensor entry at flat index {0} is not finite")]
    NonFinite(usize),

    #[error("block (x={x}, y={y}) sums to {sum}, expected 1 within {tol}")]
    NotNormalized { x: usize, y: usize, sum: f64, tol: f64 },

    #[error("marginal depends on the remote input by {0}, beyond tolerance {1}")]
    SignallingInput(f64, f64),

    #[error("{0} deterministic boxes exceed the cap of {1}")]
    TooLarge(usize, usize),

    #[error("weights sum to {0}, expected 1 within {1}")]
    WeightSumMismatch(f64, f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("scenario mismatch between the two realizations")]
    ScenarioMismatch,

    #[error("parameter {name}={value} outside [{lo}, {hi}]")]
    RangeError { name: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("operator is not Hermitian: max asymmetry {0} exceeds {1}")]
    NotHermitian(f64, f64),

    #[error("operator trace {0} differs from 1 beyond {1}")]
    NotUnitTrace(f64, f64),

    #[error("effect has eigenvalue {0} below -{1}")]
    NegativeEffect(f64, f64),

    #[error("POVM for input {input} does not sum to identity (max deviation {dev})")]
    IncompletePovm { input: usize, dev: f64 },

    #[error("eigensolver did not converge within {0} sweeps")]
    ConvergenceFailure(usize),

    #[error("linear program infeasible (residual {0})")]
    LpInfeasible(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("decomposition does not reproduce the box: {0}")]
    NotLocal(String),

    #[error("no registered Bell functional carries a quantum bound")]
    NoQuantumBoundRegistered,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
