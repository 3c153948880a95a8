use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{fit_rate, run_pool, RateFit, StudyError};
use crate::cell::{
    corrector_difference, reference_tensor, solve_cell, tensor_energy, tensor_window, CellError, HomTensor,
    ReferencePreset, Scheme,
};
use crate::coeff::{modulus_rho, CoefficientField, ModulusEstimate, ModulusSampling, PeriodizedField};
use crate::fem::MeshSpec;

/// Execution knobs shared by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads for independent sweep points.
    pub jobs: usize,
    /// Record wall time; when false the `seconds` column is 0 so output is
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { jobs: 1, timing: false }
    }
}

/// One row of a tensor sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub scheme: Scheme,
    pub ell: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Tinv")]
    pub tinv: f64,
    pub nodes_per_unit: f64,
    pub entries: Option<Vec<Vec<f64>>>,
    pub err_max: Option<f64>,
    pub err_fro: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

impl StudyRecord {
    fn from_result(
        scheme: Scheme,
        r: f64,
        tinv: f64,
        mesh: &MeshSpec,
        result: Result<HomTensor, CellError>,
        reference: &HomTensor,
        seconds: f64,
    ) -> Self {
        let ell = 2.0 * std::f64::consts::PI * r;
        match result {
            Ok(t) => {
                let (m, f) = t.error_to(reference);
                StudyRecord {
                    scheme,
                    ell: t.ell,
                    r: t.r,
                    tinv: t.tinv,
                    nodes_per_unit: t.nodes_per_unit,
                    entries: Some(t.entries),
                    err_max: Some(m),
                    err_fro: Some(f),
                    seconds,
                    error: None,
                }
            }
            Err(e) => StudyRecord {
                scheme,
                ell,
                r,
                tinv,
                nodes_per_unit: mesh.nodes_per_unit(ell),
                entries: None,
                err_max: None,
                err_fro: None,
                seconds,
                error: Some(e.to_string()),
            },
        }
    }
}

fn timed<T>(timing: bool, f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    let secs = if timing { start.elapsed().as_secs_f64() } else { 0.0 };
    (out, secs)
}

/// Energy-form tensor of `scheme` on the cell of radius `r`. The window
/// scheme averages over radius `r` inside a box of radius `2r`.
pub fn scheme_tensor(
    base: &Arc<CoefficientField>,
    scheme: Scheme,
    r: f64,
    tinv: f64,
    mesh: &MeshSpec,
) -> Result<HomTensor, CellError> {
    if scheme.regularized() != (tinv > 0.0) {
        return Err(CellError::Invalid(format!(
            "scheme {scheme} is {} but Tinv = {tinv}",
            if scheme.regularized() { "regularized" } else { "unregularized" }
        )));
    }
    if scheme == Scheme::Window {
        return tensor_window(base, 2.0 * r, r, tinv, mesh);
    }
    let field = PeriodizedField::from_radius(base.clone(), r);
    tensor_energy(&solve_cell(&field, mesh, scheme.boundary(), tinv)?)
}

/// Reference tensor for a sweep: the unit-cell periodic tensor when the
/// field declares period 1 in every axis (or is constant), otherwise the
/// regularized Dirichlet preset.
pub fn default_reference(
    base: &Arc<CoefficientField>,
    unit_cell_mesh: &MeshSpec,
    preset: &ReferencePreset,
) -> Result<HomTensor, CellError> {
    let unit_periodic = base.is_constant()
        || base
            .period_hint()
            .is_some_and(|p| p.len() == base.dim() && p.iter().all(|&v| v == 1.0));
    if unit_periodic {
        let field = PeriodizedField::new(base.clone(), 1.0).with_origin([0.0, 0.0]);
        tensor_energy(&solve_cell(&field, unit_cell_mesh, Scheme::P.boundary(), 0.0)?)
    } else {
        reference_tensor(base, preset)
    }
}

/// One record per `R`; `tinv_of_r` gives the regularization at each radius.
pub fn sweep_tensor(
    base: &Arc<CoefficientField>,
    scheme: Scheme,
    rs: &[f64],
    mesh: &MeshSpec,
    tinv_of_r: impl Fn(f64) -> f64 + Sync,
    reference: &HomTensor,
    opts: &SweepOptions,
) -> Vec<StudyRecord> {
    let mut records = run_pool(rs, opts.jobs, |&r| {
        let tinv = tinv_of_r(r);
        let (res, secs) = timed(opts.timing, || scheme_tensor(base, scheme, r, tinv, mesh));
        StudyRecord::from_result(scheme, r, tinv, mesh, res, reference, secs)
    });
    records.sort_by(|a, b| a.r.total_cmp(&b.r));
    records
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationSweep {
    /// Unregularized periodic tensor at the same `R` and mesh.
    pub exact: HomTensor,
    /// `err_*` columns hold `|A_T − A|`.
    pub records: Vec<StudyRecord>,
    /// Fit of the max-entry gap against `T = 1/Tinv`.
    pub fit: Option<RateFit>,
}

impl RegularizationSweep {
    /// Max-entry gaps in record order (decreasing `Tinv`).
    pub fn gaps(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.err_max).collect()
    }
}

/// Gap `|A^{R,*}_T − A^{R,*}|` for each regularization in `tinvs`.
pub fn sweep_regularization(
    base: &Arc<CoefficientField>,
    r: f64,
    tinvs: &[f64],
    mesh: &MeshSpec,
    opts: &SweepOptions,
) -> Result<RegularizationSweep, StudyError> {
    if tinvs.is_empty() || tinvs.iter().any(|&t| !(t > 0.0)) {
        return Err(StudyError::Invalid("Tinv list must be nonempty and positive".into()));
    }
    if tinvs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(StudyError::Invalid("Tinv list must be decreasing".into()));
    }
    let exact = scheme_tensor(base, Scheme::P, r, 0.0, mesh)?;
    let records = run_pool(tinvs, opts.jobs, |&tinv| {
        let (res, secs) = timed(opts.timing, || scheme_tensor(base, Scheme::PT, r, tinv, mesh));
        StudyRecord::from_result(Scheme::PT, r, tinv, mesh, res, &exact, secs)
    });
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|rec| rec.err_max.map(|e| (1.0 / rec.tinv, e)))
        .collect();
    let fit = fit_rate(&pts).ok();
    Ok(RegularizationSweep { exact, records, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceRecord {
    #[serde(rename = "R")]
    pub r: f64,
    pub ell: f64,
    pub cells: usize,
    pub nodes_per_unit: f64,
    pub e: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectorSweep {
    pub mesh: MeshSpec,
    pub mesh_label: String,
    pub records: Vec<DifferenceRecord>,
    pub fit: Option<RateFit>,
}

impl CorrectorSweep {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.e).collect()
    }
}

/// `E(R)` for each radius.
pub fn sweep_corrector_difference(
    base: &Arc<CoefficientField>,
    rs: &[f64],
    mesh: &MeshSpec,
    opts: &SweepOptions,
) -> CorrectorSweep {
    let mut records = run_pool(rs, opts.jobs, |&r| {
        let field = PeriodizedField::from_radius(base.clone(), r);
        let ell = field.cell_side();
        let (res, seconds) = timed(opts.timing, || corrector_difference(&field, mesh));
        let (e, error) = match res {
            Ok(v) => (Some(v), None),
            Err(err) => (None, Some(err.to_string())),
        };
        DifferenceRecord {
            r,
            ell,
            cells: mesh.cells_for(ell),
            nodes_per_unit: mesh.nodes_per_unit(ell),
            e,
            seconds,
            error,
        }
    });
    records.sort_by(|a, b| a.r.total_cmp(&b.r));
    let pts: Vec<(f64, f64)> = records.iter().filter_map(|d| d.e.map(|e| (d.r, e))).collect();
    CorrectorSweep {
        mesh: *mesh,
        mesh_label: mesh.label(),
        records,
        fit: fit_rate(&pts).ok(),
    }
}

/// Decay exponent `τ` in `ρ(A, L) ≲ L^{−τ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauFit {
    /// `ρ` vanished (to rounding) at the largest `L`: an exact translate was found.
    ExactPeriodic,
    Fitted { tau: f64, fit: RateFit },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusSweep {
    pub records: Vec<ModulusEstimate>,
    pub tau: TauFit,
}

/// Sampled `ρ(A, L)` over an increasing list of `L`.
pub fn sweep_modulus(
    field: &CoefficientField,
    ls: &[f64],
    sampling: &ModulusSampling,
    opts: &SweepOptions,
) -> Result<ModulusSweep, StudyError> {
    if ls.is_empty() || ls.iter().any(|&l| !(l > 0.0)) || ls.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StudyError::Invalid("L list must be positive and increasing".into()));
    }
    let records = run_pool(ls, opts.jobs, |&l| modulus_rho(field, l, sampling));
    // Matching translates of transcendental data agree only to rounding.
    let exact_tol = 1e-10 * field.sup_bound();
    let tau = if records.last().is_some_and(|r| r.rho <= exact_tol) {
        TauFit::ExactPeriodic
    } else {
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.l, r.rho)).collect();
        match fit_rate(&pts) {
            Ok(fit) => match fit.slope {
                Some(s) => TauFit::Fitted { tau: -s, fit },
                None => TauFit::ExactPeriodic,
            },
            Err(_) => TauFit::Undetermined,
        }
    };
    Ok(ModulusSweep { records, tau })
}
