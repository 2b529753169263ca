//! Dense, diagonal, and diagonal-block linear algebra over prime fields.

mod blocks;
mod dense;
mod diag;

pub use blocks::DiagBlockMatrix;
pub use dense::FieldMatrix;
pub use diag::DiagonalMatrix;

use thiserror::Error;

use crate::field::FieldError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("right-hand side is outside the column span")]
    Inconsistent,
    #[error(transparent)]
    Field(#[from] FieldError),
}
