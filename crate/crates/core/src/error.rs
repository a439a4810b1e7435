//! Crate error type. Variants map onto process exit codes in the CLI:
//! invalid input and precondition failures exit 1, internal-consistency
//! failures (an oracle disagreeing with a closed form) exit 2, and flow
//! non-convergence exits 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two routes that are provably equal disagreed beyond tolerance.
    /// This is never resolved silently; it means a bug.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("degenerate eigenvalue clustering: {0}")]
    Degeneracy(String),

    #[error("no integer witness: {0}")]
    NoWitness(String),

    #[error("flow stagnated: {0}")]
    Stagnation(String),

    #[error("flow did not converge: {0}")]
    NonConvergence(String),

    #[error("unknown catalog entry '{name}'; available entries: {}", available.join(", "))]
    UnknownEntry { name: String, available: Vec<String> },
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn inconsistent(msg: impl Into<String>) -> Self {
        Error::InternalConsistency(msg.into())
    }

    /// CLI exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InternalConsistency(_) => 2,
            Error::Stagnation(_) | Error::NonConvergence(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::invalid_input("x").exit_code(), 1);
        assert_eq!(Error::precondition("x").exit_code(), 1);
        assert_eq!(Error::NoWitness("x".into()).exit_code(), 1);
        assert_eq!(Error::Degeneracy("x".into()).exit_code(), 1);
        assert_eq!(Error::inconsistent("x").exit_code(), 2);
        assert_eq!(Error::Stagnation("x".into()).exit_code(), 3);
        assert_eq!(Error::NonConvergence("x".into()).exit_code(), 3);
    }
}
