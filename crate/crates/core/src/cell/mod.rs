//! Cell problems on periodized fields and the homogenized tensors they
//! define.

mod solve;
mod tensor;

pub use solve::{solve_cell, solve_corrector, CellSolution, Corrector};
pub use tensor::{
    corrector_difference, reference_tensor, tensor_energy, tensor_flux, tensor_window, HomTensor,
    ReferencePreset, TensorForm, Window,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{BoundaryKind, FemError};
use crate::linalg::SolveError;

/// Cell-problem variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Periodic, unregularized.
    P,
    /// Periodic with a zero-order term `T⁻¹ w`.
    PT,
    /// Homogeneous Dirichlet, unregularized.
    D,
    /// Homogeneous Dirichlet with a zero-order term.
    DT,
    /// Regularized periodic corrector on an outer box, averaged over an inner window.
    #[serde(rename = "window")]
    Window,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::P => "P",
            Scheme::PT => "PT",
            Scheme::D => "D",
            Scheme::DT => "DT",
            Scheme::Window => "window",
        }
    }

    pub fn from_name(s: &str) -> Option<Scheme> {
        match s {
            "P" | "p" => Some(Scheme::P),
            "PT" | "pt" => Some(Scheme::PT),
            "D" | "d" => Some(Scheme::D),
            "DT" | "dt" => Some(Scheme::DT),
            "window" | "W" => Some(Scheme::Window),
            _ => None,
        }
    }

    pub fn boundary(self) -> BoundaryKind {
        match self {
            Scheme::P | Scheme::PT | Scheme::Window => BoundaryKind::Periodic,
            Scheme::D | Scheme::DT => BoundaryKind::Dirichlet,
        }
    }

    pub fn regularized(self) -> bool {
        matches!(self, Scheme::PT | Scheme::DT | Scheme::Window)
    }

    /// Scheme for a boundary kind and regularization flag.
    pub fn from_parts(bc: BoundaryKind, tinv: f64) -> Scheme {
        match (bc, tinv > 0.0) {
            (BoundaryKind::Dirichlet, false) => Scheme::D,
            (BoundaryKind::Dirichlet, true) => Scheme::DT,
            (_, false) => Scheme::P,
            (_, true) => Scheme::PT,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("invalid cell problem: {0}")]
    Invalid(String),
}
