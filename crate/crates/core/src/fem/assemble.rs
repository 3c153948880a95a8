use std::fmt::Write as _;

use super::{DofMap, ElementView, FemError, Grid, ReferenceElement};
use crate::coeff::{Mat, PeriodizedField};
use crate::linalg::SparseSym;

/// Stiffness, mass and cell-problem loads on one grid and dof map.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    /// `∫ A ∇u · ∇v`.
    pub stiffness: SparseSym<f64>,
    /// `∫ u v` (consistent, not lumped).
    pub mass: SparseSym<f64>,
    /// `loads[p] = −∫ A e_p · ∇v`.
    pub loads: Vec<Vec<f64>>,
    /// Zero-order coefficient of the solver operator `K + tinv·M`.
    pub tinv: f64,
}

impl AssembledForms {
    /// `K + tinv·M`.
    pub fn operator(&self) -> SparseSym<f64> {
        if self.tinv == 0.0 {
            self.stiffness.clone()
        } else {
            self.stiffness.lin_comb(1.0, &self.mass, self.tinv)
        }
    }

    /// Load for the direction `ξ = Σ ξ_p e_p`.
    pub fn load_for(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.stiffness.dim();
        let mut out = vec![0.0; n];
        for (p, &c) in xi.iter().enumerate() {
            if c != 0.0 {
                for (o, f) in out.iter_mut().zip(&self.loads[p]) {
                    *o += c * f;
                }
            }
        }
        out
    }

    /// Plain-text dump of K, M and the loads in `row col value` form.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        out.push_str("# stiffness\n");
        out.push_str(&self.stiffness.to_coordinate_text());
        out.push_str("# mass\n");
        out.push_str(&self.mass.to_coordinate_text());
        for (p, f) in self.loads.iter().enumerate() {
            let _ = writeln!(out, "# load {}", p + 1);
            for (i, v) in f.iter().enumerate() {
                let _ = writeln!(out, "{i} 0 {v:e}");
            }
        }
        out
    }
}

/// Evaluates `A` at a quadrature point, rejecting non-finite values.
pub fn coefficient_at(field: &PeriodizedField, x: crate::coeff::Point) -> Result<Mat, FemError> {
    let a = field.value(x);
    let d = field.dim();
    for row in a.iter().take(d) {
        for v in row.iter().take(d) {
            if !v.is_finite() {
                return Err(FemError::Coefficient { point: x });
            }
        }
    }
    Ok(a)
}

pub(crate) fn check_dims(grid: &Grid, dofmap: &DofMap, field: &PeriodizedField) -> Result<(), FemError> {
    if field.dim() != grid.dim() {
        return Err(FemError::DimensionMismatch {
            field: field.dim(),
            grid: grid.dim(),
        });
    }
    if !dofmap.matches(grid) {
        return Err(FemError::InvalidGrid("dof map built for a different grid".into()));
    }
    Ok(())
}

/// Q1 assembly with per-point coefficient sampling.
pub fn assemble(
    grid: &Grid,
    dofmap: &DofMap,
    field: &PeriodizedField,
    tinv: f64,
) -> Result<AssembledForms, FemError> {
    check_dims(grid, dofmap, field)?;
    if !(tinv >= 0.0 && tinv.is_finite()) {
        return Err(FemError::InvalidGrid(format!("regularization {tinv} must be nonnegative")));
    }
    let d = grid.dim();
    let re = ReferenceElement::q1(d);
    let nloc = re.nloc();
    let h = grid.h();
    let jac = h.powi(d as i32);

    let (row_ptr, cols) = dofmap.stencil_pattern();
    let mut stiffness = SparseSym::<f64>::from_csr_pattern(row_ptr, cols);
    let mut mass = stiffness.zeros_like();
    let n = dofmap.dof_count();
    let mut loads = vec![vec![0.0; n]; d];

    // The element mass matrix does not depend on the coefficient.
    let mut me = [[0.0; 4]; 4];
    for qp in re.points() {
        for a in 0..nloc {
            for b in 0..nloc {
                me[a][b] += qp.weight * jac * qp.shape[a] * qp.shape[b];
            }
        }
    }

    for e in 0..grid.element_count() {
        let view = ElementView::new(grid, dofmap, e);
        let mut ke = [[0.0; 4]; 4];
        let mut fe = [[0.0; 4]; 2];
        for qp in re.points() {
            let a = coefficient_at(field, view.point(qp))?;
            let w = qp.weight * jac;
            let mut grads = [[0.0; 2]; 4];
            for (g, dg) in grads.iter_mut().zip(qp.dshape.iter()).take(nloc) {
                *g = [dg[0] / h, dg[1] / h];
            }
            for i in 0..nloc {
                // A ∇φ_i
                let mut agi = [0.0; 2];
                for r in 0..d {
                    for c in 0..d {
                        agi[r] += a[r][c] * grads[i][c];
                    }
                }
                for j in i..nloc {
                    let mut s = 0.0;
                    for r in 0..d {
                        s += agi[r] * grads[j][r];
                    }
                    ke[i][j] += w * s;
                }
                for p in 0..d {
                    // (A e_p)·∇φ_i with column p of A.
                    let mut s = 0.0;
                    for r in 0..d {
                        s += a[r][p] * grads[i][r];
                    }
                    fe[p][i] -= w * s;
                }
            }
        }
        for i in 0..nloc {
            for j in 0..i {
                ke[i][j] = ke[j][i];
            }
        }
        for i in 0..nloc {
            let Some(di) = view.dofs[i] else { continue };
            for j in 0..nloc {
                let Some(dj) = view.dofs[j] else { continue };
                stiffness.add(di, dj, ke[i][j]);
                mass.add(di, dj, me[i][j]);
            }
            for p in 0..d {
                loads[p][di] += fe[p][i];
            }
        }
    }
    Ok(AssembledForms {
        stiffness,
        mass,
        loads,
        tinv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{periodize, Builtin, CoefficientField};
    use crate::fem::Layout;

    fn unit_const(d: usize, c: f64) -> PeriodizedField {
        periodize(CoefficientField::constant(d, c).unwrap(), 1.0).with_origin([0.0, 0.0])
    }

    #[test]
    fn one_interior_dof() {
        let g = Grid::new(1, 1.0, [0.0; 2], 3, Layout::Dirichlet).unwrap();
        let dm = DofMap::dirichlet(&g);
        let f = assemble(&g, &dm, &unit_const(1, 1.0), 0.0).unwrap();
        assert_eq!(f.stiffness.dim(), 1);
        assert!((f.stiffness.get(0, 0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn constants_in_kernel_and_zero_loads() {
        for (d, n) in [(1usize, 7usize), (2, 5)] {
            let g = Grid::new(d, 1.0, [0.0; 2], n, Layout::Periodic).unwrap();
            let dm = DofMap::periodic(&g);
            let f = assemble(&g, &dm, &unit_const(d, 2.5), 0.0).unwrap();
            let k1 = f.stiffness.apply(&vec![1.0; dm.dof_count()]);
            assert!(k1.iter().all(|v| v.abs() < 1e-12));
            for load in &f.loads {
                assert!(load.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn symmetric_stiffness_and_mass_total() {
        let l = 2.0 * std::f64::consts::PI * 1.3;
        let field = periodize(CoefficientField::builtin(Builtin::A1), l);
        let g = Grid::new(2, l, field.origin(), 23, Layout::Periodic).unwrap();
        let dm = DofMap::periodic(&g);
        let f = assemble(&g, &dm, &field, 0.0).unwrap();
        assert_eq!(f.stiffness.max_asymmetry(), 0.0);
        assert_eq!(f.mass.max_asymmetry(), 0.0);
        let ones = vec![1.0; dm.dof_count()];
        let total: f64 = ones.iter().zip(f.mass.apply(&ones)).map(|(a, b)| a * b).sum();
        assert!((total - g.volume()).abs() <= 1e-12 * g.volume());
        let rows = f.mass.apply(&ones);
        assert!(rows.iter().all(|&r| r > 0.0));
        for load in &f.loads {
            let s: f64 = load.iter().sum();
            assert!(s.abs() < 1e-10, "compatibility {s}");
        }
    }

    #[test]
    fn patch_test_energy() {
        let c = 1.7;
        let field = periodize(CoefficientField::constant(2, c).unwrap(), 3.0);
        let g = Grid::new(2, 3.0, field.origin(), 9, Layout::Dirichlet).unwrap();
        let dm = DofMap::free(&g);
        let f = assemble(&g, &dm, &field, 0.0).unwrap();
        let xi = [0.6, -1.1];
        let u: Vec<f64> = (0..dm.dof_count())
            .map(|k| {
                let p = g.node_point(dm.node_of(k));
                xi[0] * p[0] + xi[1] * p[1]
            })
            .collect();
        let energy: f64 = u.iter().zip(f.stiffness.apply(&u)).map(|(a, b)| a * b).sum();
        let exact = c * (xi[0] * xi[0] + xi[1] * xi[1]) * g.volume();
        assert!((energy - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = Grid::new(1, 1.0, [0.0; 2], 4, Layout::Periodic).unwrap();
        let dm = DofMap::periodic(&g);
        assert!(matches!(
            assemble(&g, &dm, &unit_const(2, 1.0), 0.0),
            Err(FemError::DimensionMismatch { .. })
        ));
    }
}
