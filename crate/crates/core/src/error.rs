use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("Padé pole search failed to converge for order {0}")]
    PadePoles(usize),

    #[error("time step {dt_ns:.4e} ns exceeds the stability limit {limit_ns:.4e} ns")]
    TimeStep { dt_ns: f64, limit_ns: f64 },

    #[error("hierarchy of {ados} ADOs needs ~{bytes} bytes, above the {limit} byte limit")]
    Memory { ados: usize, bytes: u128, limit: u128 },

    #[error("propagation diverged at t = {time_ns:.6e} ns: {reason}")]
    Divergence { time_ns: f64, reason: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects non-finite values.
pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}

/// Rejects values that are not strictly positive (or not finite).
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive, got {value}")))
    }
}
