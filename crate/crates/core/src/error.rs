use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A reserve is zero, negative or not finite.
    #[error("pool is inactive: reserves must be positive and finite (x={x}, y={y})")]
    InactivePool { x: f64, y: f64 },

    #[error("exponent {0} is outside the supported range 1..=8")]
    ExponentOutOfRange(u32),

    /// An argument violated a numeric precondition.
    #[error("domain error: `{name}` must be {expected}, got {value}")]
    Domain {
        name: &'static str,
        expected: &'static str,
        value: f64,
    },

    /// Swap input above the per-trade cap of 10x the input-side reserve.
    #[error("input {amount} exceeds the cap of {limit} (10x the input-side reserve)")]
    InputTooLarge { amount: f64, limit: f64 },

    #[error("swap produced a degenerate reserve ({0})")]
    DegenerateReserve(f64),

    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, expected: &'static str, value: f64) -> Self {
        Error::Domain {
            name,
            expected,
            value,
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN, infinities and values `<= 0`.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, "positive and finite", value))
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, "non-negative and finite", value))
    }
}
