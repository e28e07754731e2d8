use thiserror::Error;

use crate::evaluator::EvalError;

/// Failures of the search stages.
#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("tournament pool is empty")]
    EmptyPool,
    #[error("selection tally is empty")]
    EmptyTally,
    #[error(transparent)]
    Eval(#[from] EvalError),
}
