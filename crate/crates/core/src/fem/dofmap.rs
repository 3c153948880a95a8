use serde::{Deserialize, Serialize};

use super::{FemError, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// Opposite faces identified (`H¹` periodic).
    Periodic,
    /// Boundary nodes removed (`H¹₀`).
    Dirichlet,
    /// Every geometric node is an unknown (nodal interpolants, patch tests).
    Free,
}

/// Map from geometric grid nodes to unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kind: BoundaryKind,
    dim: usize,
    cells: usize,
    dofs_per_dim: usize,
    dof_count: usize,
}

impl DofMap {
    pub fn new(grid: &Grid, kind: BoundaryKind) -> Self {
        let cells = grid.cells();
        let dofs_per_dim = match kind {
            BoundaryKind::Periodic => cells,
            BoundaryKind::Dirichlet => cells - 1,
            BoundaryKind::Free => cells + 1,
        };
        DofMap {
            kind,
            dim: grid.dim(),
            cells,
            dofs_per_dim,
            dof_count: dofs_per_dim.pow(grid.dim() as u32),
        }
    }

    pub fn periodic(grid: &Grid) -> Self {
        Self::new(grid, BoundaryKind::Periodic)
    }

    pub fn dirichlet(grid: &Grid) -> Self {
        Self::new(grid, BoundaryKind::Dirichlet)
    }

    pub fn free(grid: &Grid) -> Self {
        Self::new(grid, BoundaryKind::Free)
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn dofs_per_dim(&self) -> usize {
        self.dofs_per_dim
    }

    /// True when this map was built for `grid`'s partition.
    pub fn matches(&self, grid: &Grid) -> bool {
        self.dim == grid.dim() && self.cells == grid.cells()
    }

    pub fn check_len(&self, len: usize) -> Result<(), FemError> {
        if len == self.dof_count {
            Ok(())
        } else {
            Err(FemError::SizeMismatch {
                expected: self.dof_count,
                got: len,
            })
        }
    }

    #[inline]
    fn axis_dof(&self, i: usize) -> Option<usize> {
        match self.kind {
            BoundaryKind::Periodic => Some(i % self.cells),
            BoundaryKind::Dirichlet => {
                if i == 0 || i >= self.cells {
                    None
                } else {
                    Some(i - 1)
                }
            }
            BoundaryKind::Free => Some(i),
        }
    }

    /// Unknown attached to the geometric node with indices `idx`, if any.
    #[inline]
    pub fn dof(&self, idx: [usize; 2]) -> Option<usize> {
        let a = self.axis_dof(idx[0])?;
        if self.dim == 1 {
            return Some(a);
        }
        let b = self.axis_dof(idx[1])?;
        Some(a + self.dofs_per_dim * b)
    }

    /// Geometric node indices of a representative node for `dof`.
    pub fn node_of(&self, dof: usize) -> [usize; 2] {
        let shift = match self.kind {
            BoundaryKind::Periodic | BoundaryKind::Free => 0,
            BoundaryKind::Dirichlet => 1,
        };
        if self.dim == 1 {
            [dof + shift, 0]
        } else {
            [dof % self.dofs_per_dim + shift, dof / self.dofs_per_dim + shift]
        }
    }

    /// Column sets of the nearest-neighbour stencil in CSR form.
    pub fn stencil_pattern(&self) -> (Vec<usize>, Vec<usize>) {
        let mut row_ptr = Vec::with_capacity(self.dof_count + 1);
        let mut cols = Vec::with_capacity(self.dof_count * 3usize.pow(self.dim as u32));
        row_ptr.push(0);
        let mut row = Vec::with_capacity(9);
        for dof in 0..self.dof_count {
            row.clear();
            let [i, j] = self.node_of(dof);
            let (jlo, jhi) = if self.dim == 1 { (0, 0) } else { (0, 2) };
            for dj in jlo..=jhi {
                for di in 0..=2usize {
                    let Some(ni) = self.neighbour(i, di) else { continue };
                    let nj = if self.dim == 1 {
                        Some(0)
                    } else {
                        self.neighbour(j, dj)
                    };
                    let Some(nj) = nj else { continue };
                    if let Some(c) = self.dof([ni, nj]) {
                        row.push(c);
                    }
                }
            }
            row.sort_unstable();
            row.dedup();
            cols.extend_from_slice(&row);
            row_ptr.push(cols.len());
        }
        (row_ptr, cols)
    }

    /// Geometric index of the neighbour `i + delta − 1` along an axis.
    fn neighbour(&self, i: usize, delta: usize) -> Option<usize> {
        match self.kind {
            BoundaryKind::Periodic => Some((i + self.cells + delta - 1) % self.cells),
            BoundaryKind::Dirichlet | BoundaryKind::Free => {
                (i + delta).checked_sub(1).filter(|&v| v <= self.cells)
            }
        }
    }
}
