use super::{DofMap, Grid};
use crate::coeff::Point;

/// Gauss point of the reference cube `[0,1]^d` with Q1 shape data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub xi: Point,
    /// Reference weight; multiply by `h^d` for the physical weight.
    pub weight: f64,
    pub shape: [f64; 4],
    /// Reference gradients; divide by `h` for physical gradients.
    pub dshape: [[f64; 2]; 4],
}

/// Q1 element with the tensor 2-point Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    dim: usize,
    points: Vec<QuadPoint>,
}

impl ReferenceElement {
    pub fn q1(dim: usize) -> Self {
        let g = 0.5 / 3f64.sqrt();
        let nodes = [0.5 - g, 0.5 + g];
        let mut points = Vec::new();
        if dim == 1 {
            for &s in &nodes {
                points.push(QuadPoint {
                    xi: [s, 0.0],
                    weight: 0.5,
                    shape: [1.0 - s, s, 0.0, 0.0],
                    dshape: [[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                });
            }
        } else {
            for &t in &nodes {
                for &s in &nodes {
                    points.push(QuadPoint {
                        xi: [s, t],
                        weight: 0.25,
                        // Corner order (0,0), (1,0), (0,1), (1,1).
                        shape: [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t],
                        dshape: [
                            [-(1.0 - t), -(1.0 - s)],
                            [1.0 - t, -s],
                            [-t, 1.0 - s],
                            [t, s],
                        ],
                    });
                }
            }
        }
        ReferenceElement { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Corners per element, `2^d`.
    pub fn nloc(&self) -> usize {
        1 << self.dim
    }

    pub fn points(&self) -> &[QuadPoint] {
        &self.points
    }
}

/// Per-element data shared by assembly and post-processing loops.
#[derive(Debug, Clone, Copy)]
pub struct ElementView {
    pub index: usize,
    pub dofs: [Option<usize>; 4],
    pub nloc: usize,
    pub origin: Point,
    pub h: f64,
}

impl ElementView {
    pub fn new(grid: &Grid, dofmap: &DofMap, e: usize) -> Self {
        let (nodes, nloc) = grid.element_nodes(e);
        let mut dofs = [None; 4];
        for (slot, node) in dofs.iter_mut().zip(nodes.iter()).take(nloc) {
            *slot = dofmap.dof(*node);
        }
        ElementView {
            index: e,
            dofs,
            nloc,
            origin: grid.element_origin(e),
            h: grid.h(),
        }
    }

    /// Physical coordinates of a quadrature point.
    #[inline]
    pub fn point(&self, qp: &QuadPoint) -> Point {
        [self.origin[0] + qp.xi[0] * self.h, self.origin[1] + qp.xi[1] * self.h]
    }

    /// Local nodal values of the dof vector `u` (zero on removed nodes).
    #[inline]
    pub fn gather(&self, u: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, d) in out.iter_mut().zip(self.dofs.iter()).take(self.nloc) {
            if let Some(i) = d {
                *o = u[*i];
            }
        }
        out
    }

    #[inline]
    pub fn value(&self, local: &[f64; 4], qp: &QuadPoint) -> f64 {
        (0..self.nloc).map(|a| qp.shape[a] * local[a]).sum()
    }

    #[inline]
    pub fn gradient(&self, local: &[f64; 4], qp: &QuadPoint) -> [f64; 2] {
        let mut g = [0.0; 2];
        for a in 0..self.nloc {
            g[0] += qp.dshape[a][0] * local[a];
            g[1] += qp.dshape[a][1] * local[a];
        }
        [g[0] / self.h, g[1] / self.h]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_weights() {
        for d in [1, 2] {
            let re = ReferenceElement::q1(d);
            let wsum: f64 = re.points().iter().map(|q| q.weight).sum();
            assert!((wsum - 1.0).abs() < 1e-15);
            for q in re.points() {
                let s: f64 = q.shape[..re.nloc()].iter().sum();
                assert!((s - 1.0).abs() < 1e-15);
                for axis in 0..d {
                    let g: f64 = q.dshape[..re.nloc()].iter().map(|v| v[axis]).sum();
                    assert!(g.abs() < 1e-15);
                }
            }
        }
    }
}
