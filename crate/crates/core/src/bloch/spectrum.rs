use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BlochError, ShiftedForms};
use crate::coeff::{CoefficientField, PeriodizedField};
use crate::fem::MeshSpec;
use crate::linalg::{smallest_eigenpairs, EigenOptions, Scalar};

/// One Bloch eigenpair. The eigenvector satisfies `v^H M v = (ℓ/2π)^d`, so the
/// first mode at `η = 0` is the constant `(2π)^{−d/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochEigenpair {
    pub eta: Vec<f64>,
    /// One-based mode index.
    pub mode: usize,
    pub lambda: f64,
    pub eigvec: Vec<Complex64>,
    pub residual: f64,
    pub m_norm_sq: f64,
    pub inside_dual_cell: bool,
}

impl BlochEigenpair {
    pub fn record(&self, ell: f64) -> BlochRecord {
        BlochRecord {
            ell,
            eta: self.eta.clone(),
            mode: self.mode,
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochRecord {
    pub ell: f64,
    pub eta: Vec<f64>,
    pub mode: usize,
    pub lambda: f64,
}

/// Second derivatives of `λ₁` at `η = 0` by central differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianEstimate {
    pub h: f64,
    pub matrix: Vec<Vec<f64>>,
    pub lambda0: f64,
    /// `max − min` of `λ₁` over the stencil.
    pub spread: f64,
    /// Smallest `λ₂ − λ₁` over the stencil.
    pub gap: f64,
    /// Per-entry difference between the `h` and `2h` stencils.
    pub step_change: Vec<Vec<f64>>,
}

impl HessianEstimate {
    /// `H/2`, to be compared with the homogenized tensor.
    pub fn half(&self) -> Vec<Vec<f64>> {
        self.matrix.iter().map(|r| r.iter().map(|v| 0.5 * v).collect()).collect()
    }
}

/// Finite-difference step `10⁻²/max(R,1)`.
pub fn default_step(r: f64) -> f64 {
    1e-2 / r.max(1.0)
}

/// Assembled shifted operator for one field and mesh.
#[derive(Debug, Clone)]
pub struct BlochSolver {
    pub field: PeriodizedField,
    pub mesh: MeshSpec,
    pub forms: ShiftedForms,
    pub opts: EigenOptions,
}

fn phase_fix(v: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm_sqr();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if best_abs > 0.0 {
        let rot = v[best].conj() / v[best].norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

impl BlochSolver {
    pub fn new(field: &PeriodizedField, mesh: &MeshSpec) -> Result<Self, BlochError> {
        let forms = ShiftedForms::new(field, mesh)?;
        let d = field.dim();
        let opts = EigenOptions {
            norm_target: (field.cell_side() / (2.0 * PI)).powi(d as i32),
            ..EigenOptions::default()
        };
        Ok(BlochSolver {
            field: field.clone(),
            mesh: *mesh,
            forms,
            opts,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn ell(&self) -> f64 {
        self.field.cell_side()
    }

    /// Half-width `1/(2R)` of the dual cell.
    pub fn half_width(&self) -> f64 {
        0.5 / self.field.radius()
    }

    pub fn inside(&self, eta: &[f64]) -> bool {
        let hw = self.half_width();
        eta.iter().all(|&e| e >= -hw && e <= hw)
    }

    /// The `count ∈ {1,2}` smallest eigenpairs of `K(η) v = λ M v`.
    pub fn eigenpairs(&self, eta: &[f64], count: usize) -> Result<Vec<BlochEigenpair>, BlochError> {
        self.eigenpairs_with(eta, count, &self.opts)
    }

    fn eigenpairs_with(
        &self,
        eta: &[f64],
        count: usize,
        opts: &EigenOptions,
    ) -> Result<Vec<BlochEigenpair>, BlochError> {
        if eta.len() != self.dim() {
            return Err(BlochError::Invalid(format!(
                "eta has {} components for a {}-dimensional field",
                eta.len(),
                self.dim()
            )));
        }
        if !(1..=2).contains(&count) {
            return Err(BlochError::Invalid(format!("mode count {count} not in {{1, 2}}")));
        }
        let inside = self.inside(eta);
        let m = &self.forms.mass;
        let pairs: Vec<(f64, Vec<Complex64>, f64)> = if eta.iter().all(|&e| e == 0.0) {
            // K(0) is real; the real solver is cheaper.
            smallest_eigenpairs::<f64>(&self.forms.stiffness, m, count, opts)?
                .into_iter()
                .map(|r| {
                    let v = r.eigenvector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    (r.eigenvalue, v, r.residual)
                })
                .collect()
        } else {
            let k = self.forms.operator(eta);
            smallest_eigenpairs::<Complex64>(&k, &self.forms.complex_mass(), count, opts)?
                .into_iter()
                .map(|r| (r.eigenvalue, r.eigenvector, r.residual))
                .collect()
        };
        let mc = self.forms.complex_mass();
        Ok(pairs
            .into_iter()
            .enumerate()
            .map(|(i, (lambda, mut v, residual))| {
                phase_fix(&mut v);
                let mv = mc.apply(&v);
                let m_norm_sq = crate::linalg::dot(&v, &mv).re();
                BlochEigenpair {
                    eta: eta.to_vec(),
                    mode: i + 1,
                    lambda,
                    eigvec: v,
                    residual,
                    m_norm_sq,
                    inside_dual_cell: inside,
                }
            })
            .collect())
    }

    pub fn lambda1(&self, eta: &[f64]) -> Result<f64, BlochError> {
        Ok(self.eigenpairs(eta, 1)?[0].lambda)
    }

    fn check_stencil(&self, h: f64) -> Result<(), BlochError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(BlochError::Invalid(format!("step {h} must be positive")));
        }
        let hw = self.half_width();
        if h >= hw {
            let mut eta = vec![0.0; self.dim()];
            eta[0] = h;
            return Err(BlochError::OutsideDualCell { eta, half_width: hw });
        }
        Ok(())
    }

    fn unit(&self, s: usize, h: f64) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[s] = h;
        e
    }

    /// `(λ₁(h e_s) − λ₁(−h e_s)) / 2h` for each axis.
    pub fn gradient(&self, h: f64) -> Result<Vec<f64>, BlochError> {
        self.check_stencil(h)?;
        (0..self.dim())
            .map(|s| {
                let p = self.lambda1(&self.unit(s, h))?;
                let m = self.lambda1(&self.unit(s, -h))?;
                Ok((p - m) / (2.0 * h))
            })
            .collect()
    }

    fn stencil_hessian(&self, h: f64, guard: bool) -> Result<(Vec<Vec<f64>>, f64, f64, f64), BlochError> {
        let d = self.dim();
        // The guard only compares λ₂ − λ₁ with the stencil spread, so λ₂ is
        // computed to a loose tolerance.
        let loose = EigenOptions {
            tol: 1e-4,
            ..self.opts
        };
        let mut lambdas = Vec::new();
        let mut gap = f64::INFINITY;
        let mut eval = |eta: Vec<f64>| -> Result<f64, BlochError> {
            let l1 = self.lambda1(&eta)?;
            if guard {
                let p = self.eigenpairs_with(&eta, 2, &loose)?;
                gap = gap.min(p[1].lambda - l1);
            }
            lambdas.push(l1);
            Ok(l1)
        };
        let l0 = eval(vec![0.0; d])?;
        let mut hm = vec![vec![0.0; d]; d];
        for k in 0..d {
            let mut p = vec![0.0; d];
            p[k] = h;
            let mut m = vec![0.0; d];
            m[k] = -h;
            hm[k][k] = (eval(p)? - 2.0 * l0 + eval(m)?) / (h * h);
        }
        for k in 0..d {
            for l in k + 1..d {
                let mut corner = |a: f64, b: f64| {
                    let mut e = vec![0.0; d];
                    e[k] = a;
                    e[l] = b;
                    eval(e)
                };
                let v = (corner(h, h)? - corner(h, -h)? - corner(-h, h)? + corner(-h, -h)?) / (4.0 * h * h);
                hm[k][l] = v;
                hm[l][k] = v;
            }
        }
        let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok((hm, l0, hi - lo, gap))
    }

    /// Central-difference Hessian of `λ₁` at `η = 0` with a crossing guard.
    ///
    /// The stencil is repeated with step `2h` to report how much the estimate
    /// moves with the step.
    pub fn hessian(&self, h: f64) -> Result<HessianEstimate, BlochError> {
        self.check_stencil(2.0 * h)?;
        let (matrix, lambda0, spread, gap) = self.stencil_hessian(h, true)?;
        if gap < 10.0 * spread {
            return Err(BlochError::Crossing { gap, spread });
        }
        let (coarse, _, _, _) = self.stencil_hessian(2.0 * h, false)?;
        let step_change = matrix
            .iter()
            .zip(&coarse)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(HessianEstimate {
            h,
            matrix,
            lambda0,
            spread,
            gap,
            step_change,
        })
    }

    /// Correlation between `Im ∂φ₁/∂η_s(0)` (central difference) and the
    /// corrector `w^s` on the periodic dof vector.
    ///
    /// Values near 1 indicate that the derivative equals `i φ₁(0) w^s` up to a
    /// constant.
    pub fn eigenvector_corrector_correlation(&self, s: usize, h: f64, w: &[f64]) -> Result<f64, BlochError> {
        self.check_stencil(h)?;
        if w.len() != self.forms.dofmap.dof_count() {
            return Err(BlochError::Invalid("corrector does not match the Bloch mesh".into()));
        }
        let p = &self.eigenpairs(&self.unit(s, h), 1)?[0].eigvec;
        let m = &self.eigenpairs(&self.unit(s, -h), 1)?[0].eigvec;
        let dphi: Vec<f64> = p.iter().zip(m).map(|(a, b)| (a - b).im() / (2.0 * h)).collect();
        Ok(pearson(&dphi, w))
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn bloch_eigs(
    field: &PeriodizedField,
    mesh: &MeshSpec,
    eta: &[f64],
    count: usize,
) -> Result<Vec<BlochEigenpair>, BlochError> {
    BlochSolver::new(field, mesh)?.eigenpairs(eta, count)
}

pub fn bloch_gradient(field: &PeriodizedField, mesh: &MeshSpec, h: f64) -> Result<Vec<f64>, BlochError> {
    BlochSolver::new(field, mesh)?.gradient(h)
}

pub fn bloch_hessian(field: &PeriodizedField, mesh: &MeshSpec, h: f64) -> Result<HessianEstimate, BlochError> {
    BlochSolver::new(field, mesh)?.hessian(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    #[serde(rename = "R")]
    pub r: f64,
    pub ell: f64,
    pub lambda2: Option<f64>,
    /// `λ₂ R²`.
    pub scaled: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub records: Vec<GapRecord>,
    /// Fitted exponent of `λ₂` against `R`, when at least three records succeeded.
    pub exponent: Option<f64>,
}

/// `λ₂(0)` on the cells of radius `R` for each entry of `rs`.
pub fn spectral_gap_scan(base: &Arc<CoefficientField>, mesh: &MeshSpec, rs: &[f64]) -> Result<GapScan, BlochError> {
    if rs.is_empty() {
        return Err(BlochError::Invalid("R list is empty".into()));
    }
    let records: Vec<GapRecord> = rs
        .iter()
        .map(|&r| {
            let field = PeriodizedField::from_radius(base.clone(), r);
            let ell = field.cell_side();
            match BlochSolver::new(&field, mesh).and_then(|s| s.eigenpairs(&vec![0.0; field.dim()], 2)) {
                Ok(p) => GapRecord {
                    r,
                    ell,
                    lambda2: Some(p[1].lambda),
                    scaled: Some(p[1].lambda * r * r),
                    error: None,
                },
                Err(e) => GapRecord {
                    r,
                    ell,
                    lambda2: None,
                    scaled: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = records.iter().filter_map(|g| g.lambda2.map(|l| (g.r, l))).collect();
    let exponent = crate::study::fit_rate(&pts).ok().and_then(|f| f.slope);
    Ok(GapScan { records, exponent })
}
