use thiserror::Error;

/// Errors surfaced by the simulation library.
#[derive(Debug, Clone, Error)]
pub enum EngineError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid temperature {0}: must be finite and > 0")]
    InvalidTemperature(f64),

    #[error("state invariant violated: {0}")]
    InvalidState(String),

    #[error("time {t} outside protocol range [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error(
        "integration drift exceeded tolerance {tolerance:.1e} \
         (trace drift {trace:.3e}, hermiticity drift {hermiticity:.3e}); \
         the step size is too large"
    )]
    DriftExceeded {
        trace: f64,
        hermiticity: f64,
        tolerance: f64,
    },

    #[error("central-block populations degenerate within {0:.1e}; mixing angle undefined")]
    DegenerateBlock(f64),

    #[error("jacobi eigensolver did not converge after {0} sweeps (non-Hermitian input?)")]
    NoConvergence(usize),

    #[error("trace expected real but has imaginary part {0:.3e}")]
    NonRealTrace(f64),
}

pub type Result<T> = std::result::Result<T, EngineError>;
