use num_complex::Complex64;

use crate::coeff::PeriodizedField;
use crate::fem::{assemble, coefficient_at, DofMap, ElementView, Grid, MeshSpec, ReferenceElement};
use crate::linalg::SparseSym;

use super::BlochError;

/// Real pieces of the shifted operator, assembled once per field and mesh:
///
/// `K(η) = S + i Σ_s η_s B_s + Σ_{s,t} η_s η_t G_st`
///
/// with `B_s = C_sᵀ − C_s`, `(C_s)_ji = ∫ (A∇φ_i)_s φ_j` and
/// `(G_st)_ji = ∫ a_st φ_i φ_j`.
#[derive(Debug, Clone)]
pub struct ShiftedForms {
    pub grid: Grid,
    pub dofmap: DofMap,
    pub stiffness: SparseSym<f64>,
    pub mass: SparseSym<f64>,
    pub skew: Vec<SparseSym<f64>>,
    pub quad: Vec<Vec<SparseSym<f64>>>,
}

impl ShiftedForms {
    pub fn new(field: &PeriodizedField, mesh: &MeshSpec) -> Result<Self, BlochError> {
        let grid = mesh.grid(field.dim(), field.cell_side(), field.origin())?;
        let dofmap = DofMap::periodic(&grid);
        let base = assemble(&grid, &dofmap, field, 0.0)?;
        let d = grid.dim();
        let mut c: Vec<SparseSym<f64>> = (0..d).map(|_| base.stiffness.zeros_like()).collect();
        let mut quad: Vec<Vec<SparseSym<f64>>> = (0..d)
            .map(|_| (0..d).map(|_| base.stiffness.zeros_like()).collect())
            .collect();

        let re = ReferenceElement::q1(d);
        let nloc = re.nloc();
        let h = grid.h();
        let jac = h.powi(d as i32);
        for e in 0..grid.element_count() {
            let view = ElementView::new(&grid, &dofmap, e);
            let mut ce = [[[0.0; 4]; 4]; 2];
            let mut ge = [[[[0.0; 4]; 4]; 2]; 2];
            for qp in re.points() {
                let a = coefficient_at(field, view.point(qp))?;
                let w = qp.weight * jac;
                for i in 0..nloc {
                    let g = [qp.dshape[i][0] / h, qp.dshape[i][1] / h];
                    for s in 0..d {
                        let ag: f64 = (0..d).map(|p| a[s][p] * g[p]).sum();
                        for j in 0..nloc {
                            ce[s][j][i] += w * ag * qp.shape[j];
                        }
                    }
                    for j in i..nloc {
                        let phi = w * qp.shape[i] * qp.shape[j];
                        for s in 0..d {
                            for t in 0..d {
                                ge[s][t][j][i] += a[s][t] * phi;
                            }
                        }
                    }
                }
            }
            for i in 0..nloc {
                let Some(di) = view.dofs[i] else { continue };
                for j in 0..nloc {
                    let Some(dj) = view.dofs[j] else { continue };
                    for s in 0..d {
                        c[s].add(dj, di, ce[s][j][i]);
                        for t in 0..d {
                            let v = if j >= i { ge[s][t][j][i] } else { ge[s][t][i][j] };
                            quad[s][t].add(dj, di, v);
                        }
                    }
                }
            }
        }
        let skew = c.iter().map(|cs| transpose_minus(cs)).collect();
        Ok(ShiftedForms {
            grid,
            dofmap,
            stiffness: base.stiffness,
            mass: base.mass,
            skew,
            quad,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `K(η)` as a Hermitian matrix.
    pub fn operator(&self, eta: &[f64]) -> SparseSym<Complex64> {
        let d = self.dim();
        let mut re = self.stiffness.clone();
        let mut im = self.stiffness.zeros_like();
        for s in 0..d {
            if eta[s] != 0.0 {
                im = im.lin_comb(1.0, &self.skew[s], eta[s]);
            }
            for t in 0..d {
                let c = eta[s] * eta[t];
                if c != 0.0 {
                    re = re.lin_comb(1.0, &self.quad[s][t], c);
                }
            }
        }
        re.to_complex(Some(&im))
    }

    pub fn complex_mass(&self) -> SparseSym<Complex64> {
        self.mass.to_complex(None)
    }
}

/// `Cᵀ − C` on the (structurally symmetric) pattern of `C`.
fn transpose_minus(c: &SparseSym<f64>) -> SparseSym<f64> {
    let mut out = c.zeros_like();
    for (i, j, v) in c.iter() {
        out.add(i, j, c.get(j, i) - v);
    }
    out
}

/// `K(η)` and `M` for one quasimomentum.
pub fn assemble_shifted(
    field: &PeriodizedField,
    mesh: &MeshSpec,
    eta: &[f64],
) -> Result<(SparseSym<Complex64>, SparseSym<Complex64>), BlochError> {
    if eta.len() != field.dim() {
        return Err(BlochError::Invalid(format!(
            "eta has {} components for a {}-dimensional field",
            eta.len(),
            field.dim()
        )));
    }
    let forms = ShiftedForms::new(field, mesh)?;
    Ok((forms.operator(eta), forms.complex_mass()))
}
