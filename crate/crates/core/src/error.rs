use thiserror::Error;

use crate::Vector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structural precondition failed and a concrete counterexample is known.
    #[error("precondition violated: {reason} (witness {witness:?})")]
    Precondition { reason: String, witness: Vec<Vector> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported range: {0}")]
    Range(String),

    #[error("budget exceeded: {what} requires {needed} steps, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Fails with [`Error::Budget`] when `needed` exceeds `budget`.
pub(crate) fn check_budget(what: &'static str, needed: u128, budget: u64) -> Result<()> {
    if needed > budget as u128 {
        Err(Error::Budget { what, needed, budget })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
