//! Dense real linear algebra and exact integer rank.
//!
//! Everything the other modules compute reduces to the handful of kernels
//! here: LU determinants, Cholesky solves, column-pivoted QR least squares
//! and fraction-free elimination over the integers.

mod cholesky;
mod lu;
mod matrix;
mod qr;
mod rank;

pub use cholesky::solve_spd;
pub use lu::lu_det;
pub use matrix::{format_number, DenseMatrix};
pub use qr::{lstsq, LeastSquares};
pub use rank::integer_rank;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix has {entries} entries but shape {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        entries: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive definite (pivot {pivot} is {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("rank deficient: numerical rank {rank}, unresolved columns {free_columns:?}")]
    RankDeficient {
        rank: usize,
        free_columns: Vec<usize>,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
