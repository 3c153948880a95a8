use serde::{Deserialize, Serialize};

use super::FemError;
use crate::coeff::Point;

/// Node layout a grid was requested with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// `N` nodes per axis with the right face identified with the left: `h = ℓ/N`.
    Periodic,
    /// `N` nodes per axis including both faces: `h = ℓ/(N−1)`.
    Dirichlet,
}

/// Uniform tensor-product partition of `[o, o + ℓ]^d` into `cells^d` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    cell_side: f64,
    origin: Point,
    cells: usize,
}

impl Grid {
    /// Builds the grid for `nodes_per_dim` nodes in the given layout.
    pub fn new(
        dim: usize,
        cell_side: f64,
        origin: Point,
        nodes_per_dim: usize,
        layout: Layout,
    ) -> Result<Self, FemError> {
        if !(1..=2).contains(&dim) {
            return Err(FemError::InvalidGrid(format!("dimension {dim} not supported")));
        }
        if nodes_per_dim < 3 {
            return Err(FemError::InvalidGrid(format!(
                "nodes_per_dim must be at least 3, got {nodes_per_dim}"
            )));
        }
        if !(cell_side > 0.0 && cell_side.is_finite()) {
            return Err(FemError::InvalidGrid(format!("cell side {cell_side} must be positive")));
        }
        let cells = match layout {
            Layout::Periodic => nodes_per_dim,
            Layout::Dirichlet => nodes_per_dim - 1,
        };
        Ok(Grid {
            dim,
            cell_side,
            origin,
            cells,
        })
    }

    /// Grid with `cells` elements per axis (shared by both layouts).
    pub fn with_cells(dim: usize, cell_side: f64, origin: Point, cells: usize) -> Result<Self, FemError> {
        if cells < 2 {
            return Err(FemError::InvalidGrid(format!("need at least 2 cells per axis, got {cells}")));
        }
        Self::new(dim, cell_side, origin, cells + 1, Layout::Dirichlet)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// Elements per axis.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Nodes per axis in the given layout.
    pub fn nodes_per_dim(&self, layout: Layout) -> usize {
        match layout {
            Layout::Periodic => self.cells,
            Layout::Dirichlet => self.cells + 1,
        }
    }

    pub fn h(&self) -> f64 {
        self.cell_side / self.cells as f64
    }

    /// `ℓ^d`.
    pub fn volume(&self) -> f64 {
        self.cell_side.powi(self.dim as i32)
    }

    pub fn element_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    /// Geometric nodes per axis, faces included.
    pub fn geometric_nodes_per_dim(&self) -> usize {
        self.cells + 1
    }

    pub fn geometric_node_count(&self) -> usize {
        self.geometric_nodes_per_dim().pow(self.dim as u32)
    }

    /// Coordinate `origin + i·h` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.h()
    }

    /// Coordinates of the geometric node with per-axis indices `idx`.
    pub fn node_point(&self, idx: [usize; 2]) -> Point {
        let mut p = [0.0; 2];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.coord(axis, idx[axis]);
        }
        p
    }

    /// Lexicographic (axis 0 fastest) geometric node index.
    #[inline]
    pub fn geometric_index(&self, idx: [usize; 2]) -> usize {
        let n = self.geometric_nodes_per_dim();
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] + n * idx[1]
        }
    }

    /// Per-axis indices of element `e` (lexicographic, axis 0 fastest).
    #[inline]
    pub fn element_index(&self, e: usize) -> [usize; 2] {
        if self.dim == 1 {
            [e, 0]
        } else {
            [e % self.cells, e / self.cells]
        }
    }

    /// Geometric node indices of the `2^d` corners of element `e`.
    #[inline]
    pub fn element_nodes(&self, e: usize) -> ([[usize; 2]; 4], usize) {
        let [i, j] = self.element_index(e);
        if self.dim == 1 {
            ([[i, 0], [i + 1, 0], [0, 0], [0, 0]], 2)
        } else {
            ([[i, j], [i + 1, j], [i, j + 1], [i + 1, j + 1]], 4)
        }
    }

    /// Lower corner of element `e`.
    pub fn element_origin(&self, e: usize) -> Point {
        self.node_point(self.element_index(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_layout_1d() {
        let g = Grid::new(1, 1.0, [0.0, 0.0], 3, Layout::Dirichlet).unwrap();
        let nodes: Vec<f64> = (0..g.geometric_nodes_per_dim()).map(|i| g.coord(0, i)).collect();
        assert_eq!(nodes, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn periodic_layouts() {
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid::new(2, l, [-l / 2.0; 2], 4, Layout::Periodic).unwrap();
        assert_eq!(g.h(), std::f64::consts::PI / 2.0);
        assert_eq!(g.nodes_per_dim(Layout::Periodic).pow(2), 16);
        let g = Grid::new(1, 1.0, [0.0; 2], 3, Layout::Periodic).unwrap();
        assert_eq!(g.h(), 1.0 / 3.0);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(Grid::new(1, 1.0, [0.0; 2], 2, Layout::Periodic).is_err());
        assert!(Grid::new(3, 1.0, [0.0; 2], 5, Layout::Periodic).is_err());
        assert!(Grid::new(2, -1.0, [0.0; 2], 5, Layout::Periodic).is_err());
    }

    #[test]
    fn side_reconstruction() {
        for n in [3usize, 7, 100, 1257] {
            let l = 2.0 * std::f64::consts::PI * 3.7;
            let g = Grid::new(2, l, [0.0; 2], n, Layout::Periodic).unwrap();
            let back = g.h() * g.cells() as f64;
            assert!((back - l).abs() <= l * f64::EPSILON, "{n}");
        }
    }
}
