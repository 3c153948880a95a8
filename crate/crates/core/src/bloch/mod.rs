//! Bloch eigenvalues of the shifted operator `e^{−iη·y} 𝒜 e^{iη·y}` on the
//! periodized cell and the Hessian of the first one at `η = 0`.

mod shifted;
mod spectrum;

pub use shifted::{assemble_shifted, ShiftedForms};
pub use spectrum::{
    bloch_eigs, bloch_gradient, bloch_hessian, default_step, spectral_gap_scan, BlochEigenpair,
    BlochRecord, BlochSolver, GapRecord, GapScan, HessianEstimate,
};

use thiserror::Error;

use crate::fem::FemError;
use crate::linalg::SolveError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("stencil point {eta:?} lies outside the dual cell of half-width {half_width}")]
    OutsideDualCell { eta: Vec<f64>, half_width: f64 },
    #[error(
        "eigenvalue crossing near eta = 0: gap {gap:e} is below 10x the stencil spread {spread:e}"
    )]
    Crossing { gap: f64, spread: f64 },
    #[error("invalid Bloch problem: {0}")]
    Invalid(String),
}
