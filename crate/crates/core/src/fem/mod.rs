//! Structured Q1 finite elements on a cube with periodic or Dirichlet
//! unknowns.

mod assemble;
mod dofmap;
mod element;
mod functionals;
mod grid;
mod mesh;

pub use assemble::{assemble, coefficient_at, AssembledForms};
pub use dofmap::{BoundaryKind, DofMap};
pub use element::{ElementView, QuadPoint, ReferenceElement};
pub use functionals::{
    cell_average, coefficient_average, energy_average, flux_average, for_each_point,
    gradient_difference_rms, harmonic_mean, interpolate, l2_h1_averages,
};
pub use grid::{Grid, Layout};
pub use mesh::MeshSpec;

use thiserror::Error;

use crate::coeff::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("vector has {got} entries, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("field dimension {field} does not match grid dimension {grid}")]
    DimensionMismatch { field: usize, grid: usize },
    #[error("coefficient is not finite at {point:?}")]
    Coefficient { point: Point },
}
