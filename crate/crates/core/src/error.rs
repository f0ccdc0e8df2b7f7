use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    /// The Gaussian-tilted integral `∫Dy exp(h²/2E)` diverges.
    #[error("tilted integral diverges: E = {e} is not above F1 - F0 = {gap}")]
    Divergence { e: f64, gap: f64 },

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("root not bracketed: {0}")]
    NoBracket(String),

    #[error("entropy does not change sign on the scanned interval; scan: {trace}")]
    NoSignChange { trace: String },

    #[error("enumeration guard: {0}")]
    Guard(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
