use serde::{Deserialize, Serialize};

use super::{FemError, Grid};
use crate::coeff::Point;

/// Mesh density for a cell of side `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshSpec {
    /// `round(ℓ · n)` elements per axis.
    NodesPerUnit(f64),
    /// `100 + R²` elements per axis with `R = ℓ/2π`.
    HundredPlusRSquared,
}

impl MeshSpec {
    pub fn cells_for(&self, cell_side: f64) -> usize {
        match *self {
            MeshSpec::NodesPerUnit(n) => (cell_side * n).round().max(2.0) as usize,
            MeshSpec::HundredPlusRSquared => {
                let r = cell_side / (2.0 * std::f64::consts::PI);
                (100.0 + r * r).round() as usize
            }
        }
    }

    /// Nominal nodes per unit length (for records).
    pub fn nodes_per_unit(&self, cell_side: f64) -> f64 {
        match *self {
            MeshSpec::NodesPerUnit(n) => n,
            MeshSpec::HundredPlusRSquared => self.cells_for(cell_side) as f64 / cell_side,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MeshSpec::NodesPerUnit(n) => format!("nodes_per_unit={n}"),
            MeshSpec::HundredPlusRSquared => "n=100+R^2".to_string(),
        }
    }

    pub fn grid(&self, dim: usize, cell_side: f64, origin: Point) -> Result<Grid, FemError> {
        if let MeshSpec::NodesPerUnit(n) = *self {
            if !(n > 0.0 && n.is_finite()) {
                return Err(FemError::InvalidGrid(format!("nodes_per_unit {n} must be positive")));
            }
        }
        Grid::with_cells(dim, cell_side, origin, self.cells_for(cell_side).max(3))
    }
}
