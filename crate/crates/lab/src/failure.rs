//! Exit-code classification of failures.

use std::fmt;

/// A failed command: `1` for bad input, `2` for a runtime failure of a valid
/// computation.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type Outcome<T = ()> = Result<T, Failure>;

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 2,
            error: error.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<patchfront::Error> for Failure {
    fn from(e: patchfront::Error) -> Self {
        if e.is_validation() {
            Failure::usage(e)
        } else {
            Failure::runtime(e)
        }
    }
}

/// Shorthand for rejecting input.
macro_rules! reject {
    ($($fmt:tt)+) => {
        return Err($crate::failure::Failure::usage(anyhow::anyhow!($($fmt)+)))
    };
}
pub(crate) use reject;
