use thiserror::Error;

use crate::linprog::{LpError, Status};
use crate::measures::Separation;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum Error<S: Scalar> {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Carries the separating triple read from the Farkas ray.
    #[error("marginals are not in convex order")]
    NotInConvexOrder(Box<Separation<S>>),
    #[error("irreducible components overlap: {0}")]
    PartitionViolation(String),
    #[error("LP kernel returned {0:?} for a bounded feasible program")]
    UnexpectedStatus(Status),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T, S> = std::result::Result<T, Error<S>>;
