//! Engine-level errors shared by the semantic, oracle, splitting, and
//! incremental layers.

use thiserror::Error;

use crate::registry::RegistryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Registry(#[from] RegistryError),

    #[error("fixpoint iteration cap of {limit} exceeded")]
    IterationCap { limit: usize },

    #[error("{what} requires a Horn program (no default negation)")]
    NonHorn { what: &'static str },

    #[error("{what} of size {size} exceeds the guard of {limit}; shrink the instance or raise the limit")]
    GuardExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("not a splitting set for the program and initial condition")]
    NotSplittingSet,

    #[error("splitting sequence is not monotone")]
    NonMonotoneSequence,

    #[error("splitting sequence does not cover the universe or the interpretation")]
    IncompleteSequence,

    #[error("initial condition has no position at step 0")]
    NoStepZeroPosition,

    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
}

impl EngineError {
    /// Whether the error reports a resource guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            EngineError::GuardExceeded { .. } | EngineError::IterationCap { .. }
        )
    }
}
