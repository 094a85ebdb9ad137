use thiserror::Error;

/// Errors surfaced by the calibration pipeline.
#[derive(Debug, Error)]
pub enum SmileError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate volatility: sigma must be strictly positive")]
    DegenerateVol,

    #[error("price {price} at or below the lower arbitrage bound {bound}")]
    BelowLowerBound { price: f64, bound: f64 },

    #[error("price {price} at or above the upper arbitrage bound {bound}")]
    AboveUpperBound { price: f64, bound: f64 },

    #[error("root search did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("quote dropped: {0}")]
    QuoteDropped(String),

    #[error("incoherent ask: {0}")]
    IncoherentAsk(String),

    #[error("invalid market point: {0}")]
    InvalidPoint(String),

    #[error("invalid SVI parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SmileError>;
