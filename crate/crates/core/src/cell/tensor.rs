use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solve::{solve_cell, CellSolution};
use super::{CellError, Scheme};
use crate::coeff::{sym_eigen_range, CoefficientField, Mat, PeriodizedField};
use crate::fem::{
    coefficient_average, energy_average, flux_average, gradient_difference_rms, BoundaryKind, DofMap,
    MeshSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorForm {
    /// `M(a_kl) + M(a_kp ∂_p w^l)`.
    Flux,
    /// `M((ξ+∇w)·A(ξ+∇w))`, off-diagonals by polarization.
    Energy,
}

/// Radii of a windowed average; `ell_inner` is the window side after
/// snapping to element boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub r_outer: f64,
    pub r_inner: f64,
    pub ell_inner: f64,
}

/// Homogenized tensor with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomTensor {
    pub scheme: Scheme,
    pub form: TensorForm,
    pub ell: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Tinv")]
    pub tinv: f64,
    pub nodes_per_unit: f64,
    pub entries: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

impl HomTensor {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[k][l]
    }

    pub fn as_mat(&self) -> Mat {
        let mut m = [[0.0; 2]; 2];
        for (k, row) in self.entries.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                m[k][l] = *v;
            }
        }
        m
    }

    /// `max |a_kl − a_lk|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for k in 0..d {
            for l in 0..d {
                worst = worst.max((self.entries[k][l] - self.entries[l][k]).abs());
            }
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Eigenvalue range of the symmetric part.
    pub fn eigen_range(&self) -> (f64, f64) {
        let mut m = self.as_mat();
        let off = 0.5 * (m[0][1] + m[1][0]);
        m[0][1] = off;
        m[1][0] = off;
        sym_eigen_range(&m, self.dim())
    }

    /// Max-entry and Frobenius norms of `self − other`.
    pub fn error_to(&self, other: &HomTensor) -> (f64, f64) {
        let mut max = 0.0f64;
        let mut fro = 0.0;
        for (a, b) in self.entries.iter().flatten().zip(other.entries.iter().flatten()) {
            let e = (a - b).abs();
            max = max.max(e);
            fro += e * e;
        }
        (max, fro.sqrt())
    }

    /// Max-entry difference relative to the largest entry of `other`.
    pub fn relative_error_to(&self, other: &HomTensor) -> f64 {
        self.error_to(other).0 / other.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tensor serializes")
    }
}

fn record(sol: &CellSolution, form: TensorForm, entries: Vec<Vec<f64>>) -> HomTensor {
    let ell = sol.grid.cell_side();
    HomTensor {
        scheme: sol.scheme(),
        form,
        ell,
        r: ell / (2.0 * std::f64::consts::PI),
        tinv: sol.tinv(),
        nodes_per_unit: sol.mesh.nodes_per_unit(ell),
        entries,
        window: None,
    }
}

/// `a*_kl = M(a_kl) + M(a_kp ∂_p w^l)`.
pub fn tensor_flux(sol: &CellSolution) -> Result<HomTensor, CellError> {
    let d = sol.grid.dim();
    let mean = coefficient_average(&sol.grid, &sol.field)?;
    let mut entries = vec![vec![0.0; d]; d];
    for (k, row) in entries.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = mean[k][l] + flux_average(&sol.grid, &sol.dofmap, &sol.field, &sol.correctors[l].w, k)?;
        }
    }
    Ok(record(sol, TensorForm::Flux, entries))
}

fn energy_entries(sol: &CellSolution, select: impl Fn(usize) -> bool + Copy) -> Result<Vec<Vec<f64>>, CellError> {
    let d = sol.grid.dim();
    let unit = |k: usize| {
        let mut xi = [0.0; 2];
        xi[k] = 1.0;
        xi
    };
    let form = |xi: [f64; 2]| energy_average(&sol.grid, &sol.dofmap, &sol.field, xi, &sol.combined(xi), select);
    let mut entries = vec![vec![0.0; d]; d];
    for k in 0..d {
        entries[k][k] = form(unit(k))?;
    }
    for k in 0..d {
        for l in k + 1..d {
            let mut xi = unit(k);
            xi[l] = 1.0;
            let v = 0.5 * (form(xi)? - entries[k][k] - entries[l][l]);
            entries[k][l] = v;
            entries[l][k] = v;
        }
    }
    Ok(entries)
}

/// Energy form `ξ·A*ξ = M((ξ+∇w^ξ)·A(ξ+∇w^ξ))` with `w^ξ = Σ ξ_l w^l`.
pub fn tensor_energy(sol: &CellSolution) -> Result<HomTensor, CellError> {
    let entries = energy_entries(sol, |_| true)?;
    Ok(record(sol, TensorForm::Energy, entries))
}

/// Regularized periodic correctors on the box of radius `r_outer`, energy
/// averaged over the centred sub-box of radius `r_inner`.
///
/// The window is snapped to whole elements, keeping it centred; the snapped
/// side is reported in the result.
pub fn tensor_window(
    base: &Arc<CoefficientField>,
    r_outer: f64,
    r_inner: f64,
    tinv: f64,
    mesh: &MeshSpec,
) -> Result<HomTensor, CellError> {
    if !(r_inner > 0.0 && r_inner <= r_outer) {
        return Err(CellError::Invalid(format!(
            "window radius {r_inner} must lie in (0, {r_outer}]"
        )));
    }
    if !(tinv > 0.0) {
        return Err(CellError::Invalid("windowed average needs Tinv > 0".into()));
    }
    let field = PeriodizedField::from_radius(base.clone(), r_outer);
    let sol = solve_cell(&field, mesh, BoundaryKind::Periodic, tinv)?;
    let cells = sol.grid.cells();
    let h = sol.grid.h();
    let ell_in = 2.0 * std::f64::consts::PI * r_inner;
    let mut n_in = ((ell_in / h).round() as usize).clamp(1, cells);
    if (cells - n_in) % 2 == 1 {
        n_in = if n_in < cells { n_in + 1 } else { n_in - 1 };
    }
    let lo = (cells - n_in) / 2;
    let hi = lo + n_in;
    let d = sol.grid.dim();
    let grid = &sol.grid;
    let select = |e: usize| {
        let idx = grid.element_index(e);
        (0..d).all(|a| idx[a] >= lo && idx[a] < hi)
    };
    let entries = energy_entries(&sol, select)?;
    let mut t = record(&sol, TensorForm::Energy, entries);
    t.scheme = Scheme::Window;
    t.window = Some(Window {
        r_outer,
        r_inner,
        ell_inner: n_in as f64 * h,
    });
    Ok(t)
}

/// `E = (M|∇w^{D,e₁} − ∇w^{e₁}|²)^{1/2}` on one grid.
pub fn corrector_difference(field: &PeriodizedField, mesh: &MeshSpec) -> Result<f64, CellError> {
    let per = super::solve_corrector(field, mesh, 0, BoundaryKind::Periodic, 0.0)?;
    let dir = super::solve_corrector(field, mesh, 0, BoundaryKind::Dirichlet, 0.0)?;
    let grid = &per.grid;
    Ok(gradient_difference_rms(
        grid,
        &DofMap::periodic(grid),
        &per.w,
        &DofMap::dirichlet(grid),
        &dir.w,
    )?)
}

/// Size and mesh of the regularized Dirichlet reference computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePreset {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub mesh: MeshSpec,
}

impl Default for ReferencePreset {
    fn default() -> Self {
        ReferencePreset {
            r: 20.0,
            t: 20.0,
            mesh: MeshSpec::NodesPerUnit(10.0),
        }
    }
}

/// Energy tensor of the regularized Dirichlet problem on the box of radius
/// `R` with `Tinv = 1/T`.
pub fn reference_tensor(base: &Arc<CoefficientField>, preset: &ReferencePreset) -> Result<HomTensor, CellError> {
    if !(preset.r > 0.0 && preset.t > 0.0) {
        return Err(CellError::Invalid("reference preset needs R > 0 and T > 0".into()));
    }
    let field = PeriodizedField::from_radius(base.clone(), preset.r);
    let sol = solve_cell(&field, &preset.mesh, BoundaryKind::Dirichlet, 1.0 / preset.t)?;
    tensor_energy(&sol)
}
