use alloc::string::String;

/// Errors raised across the crate.
///
/// `InvalidInput` covers every precondition violation; the remaining variants
/// are runtime failures of an otherwise valid computation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root bracket [{lo}, {hi}] has no sign change")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("eigenvalue ladder did not converge: last two values {previous} and {last}")]
    NoConvergence { previous: f64, last: f64 },

    #[error("domain too small: u = {value:e} at the right boundary at t = {time}")]
    DomainTooSmall { time: f64, value: f64 },

    #[error("tridiagonal solve failed at row {row}")]
    SingularSystem { row: usize },

    #[error("{0}")]
    Inadmissible(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the
    /// computation itself.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }
}

// `!(a < b)` is deliberate: NaN fails every check.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err($crate::Error::invalid(alloc::format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
