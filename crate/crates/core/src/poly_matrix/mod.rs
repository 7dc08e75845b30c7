//! Matrices over the Ore ring and their Smith reduction.

mod elementary;
mod matrix;
mod smith;

#[cfg(test)]
mod tests;

pub use elementary::{unimodular_inverse, Elementary, ElementaryAction, Side, Unimodular};
pub use matrix::OreMatrix;
pub use smith::{is_hyper_regular, left_smith_basis, right_smith_basis, smith_decompose, SmithOptions, SmithResult};

use thiserror::Error;

use crate::ore::OreError;
use crate::symexpr::ExprError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("rows have different lengths")]
    Ragged,
    #[error("cannot {op} a {}x{} matrix with a {}x{} one", left.0, left.1, right.0, right.1)]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("row {row}: {msg}")]
    Syntax { row: usize, msg: String },
    #[error("cannot decide whether pivot coefficient `{0}` vanishes")]
    InconclusivePivot(String),
    #[error("matrix is not hyper-regular, diagonal is [{}]", .0.join(", "))]
    NotHyperRegular(Vec<String>),
    #[error("{0}")]
    Shape(String),
    #[error("reduction did not terminate")]
    IterationLimit,
    #[error("expression of size {0} exceeds the growth bound")]
    ExpressionGrowth(usize),
    #[error(transparent)]
    Ore(#[from] OreError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
