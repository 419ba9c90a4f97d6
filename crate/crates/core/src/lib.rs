//! Rank-1 maxvol cross approximation for matrices of the form
//! `A = sigma u v* + E`.
//!
//! * [`model`] builds such matrices (ratio-controlled or independent noise).
//! * [`maxvol`] holds the alternating row/column search in three variants and
//!   the cross residual.
//! * [`bounds`] evaluates the probability constants and error bounds.
//! * [`oracle`] provides independent reference computations for testing.
//! * [`experiments`] runs seeded Monte Carlo sweeps and writes CSV output.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod maxvol;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
pub use matrix::{read_matrix, write_any_matrix, write_matrix, AnyMatrix, DenseMatrix};
pub use maxvol::{Pivot, PivotTrace, StartPolicy};
pub use model::RankOneModel;
pub use scalar::{Field, Scalar};
