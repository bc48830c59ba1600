use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter violated its validity constraint.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("domain error in {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// Adaptive quadrature ran out of subintervals before meeting its tolerance.
    #[error("quadrature did not converge (value {value:e}, error estimate {error_estimate:e})")]
    Quadrature { value: f64, error_estimate: f64 },

    #[error("complete Bell polynomial B_{order} exceeded the overflow guard")]
    BellOverflow { order: usize },

    #[error("series order {order} exceeds the supported maximum of {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("interference is identically zero; the Gamma fit is undefined")]
    DegenerateInterference,

    /// The conditional transform base `1 + c log L(u)` left (0, 1].
    #[error("conditional transform is invalid at u = {u:e} (base {base:e})")]
    InvalidTransform { u: f64, base: f64 },

    #[error("integration budget exhausted: {0}")]
    IntegrationBudget(String),

    #[error("only {count} trials satisfy the conditioning event (need at least {required})")]
    InsufficientSamples { count: usize, required: usize },

    #[error("simulation window of {radius} m is smaller than the required {required} m")]
    WindowTooSmall { radius: f64, required: f64 },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            function,
            reason: reason.into(),
        }
    }
}
