use std::fmt::Write as _;
use std::path::Path;

use apxhomog::bloch::{default_step, spectral_gap_scan, BlochError, BlochSolver, HessianEstimate};
use apxhomog::cell::{
    solve_cell, tensor_energy, tensor_flux, tensor_window, CellError, HomTensor, Scheme,
    TensorForm,
};
use apxhomog::coeff::{coercivity_check, PeriodizedField, SampleGrid};
use apxhomog::fem::MeshSpec;
use apxhomog::study::{
    default_reference, plot_data, records_to_csv, sweep_corrector_difference, sweep_modulus, sweep_regularization,
    sweep_tensor, StudyError, SweepOptions, TauFit,
};
use serde::Serialize;

use crate::config::{positive, positive_list, Resolved, RunConfig, StudyKind};
use crate::output::{emit, write_atomic};
use crate::{CliError, Command};

/// Density of the unit-cell reference for periodic fields.
const DEFAULT_REFERENCE_NPU: f64 = 400.0;
const DEFAULT_T_LIST: [f64; 4] = [4.0, 8.0, 16.0, 32.0];
const DEFAULT_L_LIST: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 20.0, 40.0];

fn cell_err(e: CellError) -> CliError {
    match e {
        CellError::Invalid(m) => CliError::Validation(m),
        other => CliError::Failure(other.to_string()),
    }
}

fn bloch_err(e: BlochError) -> CliError {
    match e {
        BlochError::Invalid(_) | BlochError::OutsideDualCell { .. } => CliError::Validation(e.to_string()),
        other => CliError::Failure(other.to_string()),
    }
}

fn study_err(e: StudyError) -> CliError {
    match e {
        StudyError::Cell(c) => cell_err(c),
        other => CliError::Validation(other.to_string()),
    }
}

fn radius_of(cfg: &RunConfig) -> f64 {
    cfg.r
        .or(cfg.ell.map(|l| l / (2.0 * std::f64::consts::PI)))
        .unwrap_or(1.0 / (2.0 * std::f64::consts::PI))
}

/// Fills the knobs specific to `cmd` so the echoed config is complete.
pub fn fill_command_defaults(cmd: Command, cfg: &mut RunConfig) {
    let r = radius_of(cfg);
    match cmd {
        Command::Tensor => {
            let window = cfg.scheme.as_deref().and_then(Scheme::from_name) == Some(Scheme::Window);
            if window {
                cfg.form = Some(TensorForm::Energy);
                cfg.r_outer.get_or_insert(r);
                let outer = cfg.r_outer.unwrap_or(r);
                cfg.r_inner.get_or_insert(0.5 * outer);
            } else {
                cfg.form.get_or_insert(TensorForm::Flux);
            }
        }
        Command::Bloch => {
            if cfg.eta.is_none() {
                if let Ok(res) = cfg.resolve() {
                    cfg.eta = Some(vec![0.0; res.field.dim()]);
                }
            }
            cfg.modes.get_or_insert(1);
            cfg.h.get_or_insert(default_step(r));
            cfg.gradient.get_or_insert(false);
            cfg.hessian.get_or_insert(false);
        }
        Command::Study => {
            let kind = *cfg.kind.get_or_insert(StudyKind::Tensor);
            match kind {
                StudyKind::Regularization => {
                    cfg.t_list.get_or_insert_with(|| DEFAULT_T_LIST.to_vec());
                }
                _ => {
                    cfg.r_list.get_or_insert_with(|| (2..=12).map(f64::from).collect());
                }
            }
            if kind == StudyKind::Tensor {
                let preset = cfg.reference_preset();
                cfg.reference_nodes_per_unit.get_or_insert(DEFAULT_REFERENCE_NPU);
                if let Ok(p) = preset {
                    cfg.reference_r.get_or_insert(p.r);
                    cfg.reference_t.get_or_insert(p.t);
                    if let MeshSpec::NodesPerUnit(n) = p.mesh {
                        cfg.reference_preset_nodes_per_unit.get_or_insert(n);
                    }
                }
            }
        }
        Command::Rho => {
            cfg.l_list.get_or_insert_with(|| DEFAULT_L_LIST.to_vec());
            if let Ok(s) = cfg.sampling() {
                cfg.y_points.get_or_insert(s.y_points_per_axis);
                cfg.t_points.get_or_insert(s.t_points_per_axis);
            }
        }
        Command::Check => {}
    }
}

pub fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let res = cfg.resolve()?;
    match cmd {
        Command::Tensor => tensor(cfg, &res),
        Command::Bloch => bloch(cfg, &res),
        Command::Study => study(cfg, &res),
        Command::Rho => rho(cfg, &res),
        Command::Check => check(cfg, &res),
    }
}

fn check_regularization(scheme: Scheme, tinv: f64) -> Result<(), CliError> {
    if scheme.regularized() != (tinv > 0.0) {
        return Err(CliError::Validation(format!(
            "scheme {scheme} {} Tinv > 0, got Tinv = {tinv}",
            if scheme.regularized() { "needs" } else { "does not take" }
        )));
    }
    Ok(())
}

fn tensor(cfg: &RunConfig, res: &Resolved) -> Result<(), CliError> {
    check_regularization(res.scheme, res.tinv)?;
    let t = if res.scheme == Scheme::Window {
        let outer = positive("r_outer", cfg.r_outer.unwrap_or(res.r))?;
        let inner = positive("r_inner", cfg.r_inner.unwrap_or(0.5 * outer))?;
        tensor_window(&res.field, outer, inner, res.tinv, &res.mesh).map_err(cell_err)?
    } else {
        let field = PeriodizedField::new(res.field.clone(), res.ell);
        let sol = solve_cell(&field, &res.mesh, res.scheme.boundary(), res.tinv).map_err(cell_err)?;
        match cfg.form.unwrap_or(TensorForm::Flux) {
            TensorForm::Flux => tensor_flux(&sol),
            TensorForm::Energy => tensor_energy(&sol),
        }
        .map_err(cell_err)?
    };
    emit(cfg.out.as_deref(), &(t.to_json() + "\n"))
}

#[derive(Serialize)]
struct ModeOut {
    eta: Vec<f64>,
    mode: usize,
    lambda: f64,
    residual: f64,
    inside_dual_cell: bool,
}

#[derive(Serialize)]
struct GradientOut {
    h: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct HessianOut {
    #[serde(flatten)]
    estimate: HessianEstimate,
    half: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct BlochOut {
    field: String,
    ell: f64,
    #[serde(rename = "R")]
    r: f64,
    nodes_per_unit: f64,
    half_width: f64,
    eigenpairs: Vec<ModeOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gradient: Option<GradientOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hessian: Option<HessianOut>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Failure(format!("cannot serialize output: {e}")))
}

fn bloch(cfg: &RunConfig, res: &Resolved) -> Result<(), CliError> {
    let d = res.field.dim();
    let eta = cfg.eta.clone().unwrap_or_else(|| vec![0.0; d]);
    if eta.len() != d || eta.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Validation(format!("eta needs {d} finite components, got {eta:?}")));
    }
    let modes = cfg.modes.unwrap_or(1);
    if modes == 0 {
        return Err(CliError::Validation("modes must be at least 1".into()));
    }
    let h = positive("h", cfg.h.unwrap_or(default_step(res.r)))?;
    let field = PeriodizedField::new(res.field.clone(), res.ell);
    let solver = BlochSolver::new(&field, &res.mesh).map_err(bloch_err)?;
    let pairs = solver.eigenpairs(&eta, modes).map_err(bloch_err)?;
    let gradient = if cfg.gradient == Some(true) {
        Some(GradientOut { h, values: solver.gradient(h).map_err(bloch_err)? })
    } else {
        None
    };
    let hessian = if cfg.hessian == Some(true) {
        let estimate = solver.hessian(h).map_err(bloch_err)?;
        let half = estimate.half();
        Some(HessianOut { estimate, half })
    } else {
        None
    };
    let out = BlochOut {
        field: res.field.name().to_string(),
        ell: res.ell,
        r: res.r,
        nodes_per_unit: res.mesh.nodes_per_unit(res.ell),
        half_width: solver.half_width(),
        eigenpairs: pairs
            .into_iter()
            .map(|p| ModeOut {
                eta: p.eta,
                mode: p.mode,
                lambda: p.lambda,
                residual: p.residual,
                inside_dual_cell: p.inside_dual_cell,
            })
            .collect(),
        gradient,
        hessian,
    };
    emit(cfg.out.as_deref(), &to_json(&out)?)
}

fn write_plot(path: Option<&Path>, points: &[(f64, f64)]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, &plot_data(points)),
        None => Ok(()),
    }
}

fn failed_points(failures: usize, total: usize) -> Result<(), CliError> {
    if failures > 0 {
        Err(CliError::Failure(format!("{failures} of {total} sweep points failed")))
    } else {
        Ok(())
    }
}

fn describe(label: &str, t: &HomTensor) {
    eprintln!("{label}: {:?}", t.entries);
}

fn study(cfg: &RunConfig, res: &Resolved) -> Result<(), CliError> {
    let opts = SweepOptions { jobs: res.jobs, timing: res.timing };
    let plot = cfg.plot_data.as_deref();
    match cfg.kind.unwrap_or(StudyKind::Tensor) {
        StudyKind::Tensor => {
            check_regularization(res.scheme, res.tinv)?;
            let rs = cfg.r_list.clone().unwrap_or_default();
            positive_list("R_list", &rs)?;
            let unit = MeshSpec::NodesPerUnit(positive(
                "reference_nodes_per_unit",
                cfg.reference_nodes_per_unit.unwrap_or(DEFAULT_REFERENCE_NPU),
            )?);
            let reference = default_reference(&res.field, &unit, &cfg.reference_preset()?).map_err(cell_err)?;
            describe("reference", &reference);
            let tinv = res.tinv;
            let records = sweep_tensor(&res.field, res.scheme, &rs, &res.mesh, |_| tinv, &reference, &opts);
            for r in records.iter().filter_map(|r| r.error.as_ref().map(|e| (r.r, e))) {
                eprintln!("R = {}: {}", r.0, r.1);
            }
            emit(cfg.out.as_deref(), &records_to_csv(&records))?;
            let pts: Vec<(f64, f64)> = records.iter().filter_map(|r| r.err_max.map(|e| (r.r, e))).collect();
            report_fit(&pts);
            write_plot(plot, &pts)?;
            failed_points(records.iter().filter(|r| r.error.is_some()).count(), records.len())
        }
        StudyKind::Regularization => {
            let ts = cfg.t_list.clone().unwrap_or_default();
            positive_list("T_list", &ts)?;
            let tinvs: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();
            let sw = sweep_regularization(&res.field, res.r, &tinvs, &res.mesh, &opts).map_err(study_err)?;
            describe("exact", &sw.exact);
            emit(cfg.out.as_deref(), &records_to_csv(&sw.records))?;
            let pts: Vec<(f64, f64)> = sw.records.iter().filter_map(|r| r.err_max.map(|e| (1.0 / r.tinv, e))).collect();
            report_fit(&pts);
            write_plot(plot, &pts)?;
            failed_points(sw.records.iter().filter(|r| r.error.is_some()).count(), sw.records.len())
        }
        StudyKind::Difference => {
            let rs = cfg.r_list.clone().unwrap_or_default();
            positive_list("R_list", &rs)?;
            let sw = sweep_corrector_difference(&res.field, &rs, &res.mesh, &opts);
            let mut csv = String::from("R,ell,mesh,cells,nodes_per_unit,E,seconds\n");
            for r in &sw.records {
                let e = r.e.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(csv, "{},{},{},{},{},{},{}", r.r, r.ell, sw.mesh_label, r.cells, r.nodes_per_unit, e, r.seconds);
                if let Some(err) = &r.error {
                    eprintln!("R = {}: {err}", r.r);
                }
            }
            emit(cfg.out.as_deref(), &csv)?;
            let pts: Vec<(f64, f64)> = sw.records.iter().filter_map(|r| r.e.map(|e| (r.r, e))).collect();
            report_fit(&pts);
            write_plot(plot, &pts)?;
            failed_points(sw.records.iter().filter(|r| r.error.is_some()).count(), sw.records.len())
        }
        StudyKind::Gap => {
            let rs = cfg.r_list.clone().unwrap_or_default();
            positive_list("R_list", &rs)?;
            let scan = spectral_gap_scan(&res.field, &res.mesh, &rs).map_err(bloch_err)?;
            let mut csv = String::from("R,ell,lambda2,lambda2_R2\n");
            for g in &scan.records {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                let _ = writeln!(csv, "{},{},{},{}", g.r, g.ell, opt(g.lambda2), opt(g.scaled));
                if let Some(err) = &g.error {
                    eprintln!("R = {}: {err}", g.r);
                }
            }
            emit(cfg.out.as_deref(), &csv)?;
            if let Some(x) = scan.exponent {
                eprintln!("fitted exponent of lambda2 in R: {x}");
            }
            let pts: Vec<(f64, f64)> = scan.records.iter().filter_map(|g| g.lambda2.map(|l| (g.r, l))).collect();
            write_plot(plot, &pts)?;
            failed_points(scan.records.iter().filter(|g| g.error.is_some()).count(), scan.records.len())
        }
    }
}

fn report_fit(pts: &[(f64, f64)]) {
    match apxhomog::study::fit_rate(pts) {
        Ok(f) if f.exact => eprintln!("fit: all errors vanish"),
        Ok(f) => eprintln!(
            "fit: slope {} over [{}, {}] ({} points)",
            f.slope.map_or("-".into(), |s| s.to_string()),
            f.r_min,
            f.r_max,
            f.points_used
        ),
        Err(e) => eprintln!("fit: {e}"),
    }
}

fn rho(cfg: &RunConfig, res: &Resolved) -> Result<(), CliError> {
    let ls = cfg.l_list.clone().unwrap_or_else(|| DEFAULT_L_LIST.to_vec());
    let sampling = cfg.sampling()?;
    let opts = SweepOptions { jobs: res.jobs, timing: false };
    let sw = sweep_modulus(&res.field, &ls, &sampling, &opts).map_err(study_err)?;
    let mut csv = String::from("L,rho\n");
    for r in &sw.records {
        let _ = writeln!(csv, "{},{}", r.l, r.rho);
    }
    emit(cfg.out.as_deref(), &csv)?;
    match sw.tau {
        TauFit::ExactPeriodic => eprintln!("tau: exact (periodic)"),
        TauFit::Fitted { tau, .. } => eprintln!("tau: {tau}"),
        TauFit::Undetermined => eprintln!("tau: undetermined"),
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckItem {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CheckReport {
    field: String,
    ell: f64,
    nodes_per_unit: f64,
    checks: Vec<CheckItem>,
    pass: bool,
}

fn item(name: &'static str, value: f64, limit: f64) -> CheckItem {
    CheckItem { name, value, limit, pass: value <= limit }
}

fn check(cfg: &RunConfig, res: &Resolved) -> Result<(), CliError> {
    let base = &res.field;
    let mut checks = Vec::new();
    let coercive = coercivity_check(base, &SampleGrid::default());
    checks.push(item("sampled coercivity deficit", (-coercive.alpha_est).max(0.0), 0.0));

    let field = PeriodizedField::new(base.clone(), res.ell);
    let sol = solve_cell(&field, &res.mesh, Scheme::P.boundary(), 0.0).map_err(cell_err)?;
    let flux = tensor_flux(&sol).map_err(cell_err)?;
    let energy = tensor_energy(&sol).map_err(cell_err)?;
    let scale = flux.max_abs();
    checks.push(item("flux/energy relative difference", energy.relative_error_to(&flux), 1e-6));
    checks.push(item("tensor asymmetry", flux.asymmetry() / scale, 1e-10));
    let (lo, hi) = flux.eigen_range();
    let slack = 1e-9 * scale;
    checks.push(item("eigenvalue below alpha", (base.alpha() - lo).max(0.0), slack));
    checks.push(item("eigenvalue above sup bound", (hi - base.sup_bound()).max(0.0), slack));
    let mean = sol.correctors.iter().fold(0.0f64, |m, c| m.max(c.average().abs()));
    let wmax = sol.correctors.iter().flat_map(|c| c.w.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    checks.push(item("corrector mean", mean / wmax, 1e-10));

    let solver = BlochSolver::new(&field, &res.mesh).map_err(bloch_err)?;
    let d = base.dim();
    let l0 = solver.lambda1(&vec![0.0; d]).map_err(bloch_err)?;
    checks.push(item("lambda1(0) relative to tensor", l0.abs() / scale, 1e-8));
    let hw = solver.half_width();
    let eta: Vec<f64> = (0..d).map(|k| hw / (4.0 + 4.0 * k as f64)).collect();
    let minus: Vec<f64> = eta.iter().map(|v| -v).collect();
    let (a, b) = (
        solver.lambda1(&eta).map_err(bloch_err)?,
        solver.lambda1(&minus).map_err(bloch_err)?,
    );
    checks.push(item("lambda1 evenness", (a - b).abs() / a.abs().max(f64::MIN_POSITIVE), 1e-8));

    let pass = checks.iter().all(|c| c.pass);
    let report = CheckReport {
        field: base.name().to_string(),
        ell: res.ell,
        nodes_per_unit: res.mesh.nodes_per_unit(res.ell),
        checks,
        pass,
    };
    emit(cfg.out.as_deref(), &to_json(&report)?)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure("invariant check failed".into()))
    }
}
