//! Sparse Hermitian linear algebra over real and complex scalars.

mod cg;
mod eigen;
mod scalar;
mod sparse;

pub use cg::{cg_solve, CgOptions, CgReport, LinearOperator};
pub use eigen::{smallest_eigenpairs, EigenOptions, EigenResult};
pub use scalar::{axpy, dot, norm, remove_mean, Scalar};
pub use sparse::SparseSym;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("eigenpair {mode} did not converge in {iterations} iterations (residual {residual:e})")]
    EigenNotConverged { mode: usize, iterations: usize, residual: f64 },
    #[error("deflation broke down (residual {residual:e})")]
    DeflationBreakdown { residual: f64 },
}
