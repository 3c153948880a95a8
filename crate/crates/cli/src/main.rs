//! `apxhomog`: homogenized tensors, Bloch spectra and convergence sweeps from
//! the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use apxhomog::cell::TensorForm;
use apxhomog::coeff::FieldJson;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{load_config, RunConfig, StudyKind};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or parameter ranges.
    #[error("{0}")]
    Validation(String),
    /// A solve, sweep or write that failed after validation.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "apxhomog", version, about = "Periodized cell problems, Bloch spectra and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// One homogenized tensor as JSON.
    Tensor,
    /// Bloch eigenvalues, and optionally the gradient and Hessian of λ₁ at η = 0, as JSON.
    Bloch,
    /// A convergence sweep as CSV.
    Study,
    /// Sampled modulus of almost periodicity as CSV of L, ρ.
    Rho,
    /// Invariant checks on the given field as JSON.
    Check,
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON run configuration; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Builtin coefficient field (A1, A2, A3).
    #[arg(long, global = true, conflicts_with = "inline")]
    builtin: Option<String>,
    /// Coefficient field as JSON: {"d", "entries", "alpha"}.
    #[arg(long, global = true)]
    inline: Option<String>,
    /// Cell scheme: P, PT, D, DT or window.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Cell side ℓ.
    #[arg(long, global = true, conflicts_with = "r")]
    ell: Option<f64>,
    /// Cell radius R, with ℓ = 2πR.
    #[arg(long = "R", id = "r", global = true)]
    r: Option<f64>,
    /// Regularization T⁻¹.
    #[arg(long, visible_alias = "Tinv", global = true)]
    tinv: Option<f64>,
    /// Elements per unit length.
    #[arg(long, global = true, conflicts_with = "preset")]
    nodes_per_unit: Option<f64>,
    /// Mesh preset; only "100+R^2".
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output file (written atomically); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; falls back to APXHOMOG_JOBS.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tensor formula: flux or energy.
    #[arg(long, global = true, value_parser = parse_form)]
    form: Option<TensorForm>,
    /// Outer radius of the window scheme.
    #[arg(long, global = true)]
    r_outer: Option<f64>,
    /// Inner (averaging) radius of the window scheme.
    #[arg(long, global = true)]
    r_inner: Option<f64>,
    /// Quasimomentum, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    eta: Option<Vec<f64>>,
    /// Number of Bloch modes.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Finite-difference step in η.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Also report ∇λ₁(0).
    #[arg(long, global = true)]
    gradient: bool,
    /// Also report the Hessian of λ₁ at 0 and its half.
    #[arg(long, global = true)]
    hessian: bool,
    /// Sweep variant.
    #[arg(long, global = true, value_enum)]
    kind: Option<StudyKind>,
    /// Radii, comma separated.
    #[arg(long = "R-list", global = true, value_delimiter = ',')]
    r_list: Option<Vec<f64>>,
    /// Regularization times T, comma separated.
    #[arg(long = "T-list", global = true, value_delimiter = ',')]
    t_list: Option<Vec<f64>>,
    /// Translation radii L, comma separated.
    #[arg(long = "L-list", global = true, value_delimiter = ',')]
    l_list: Option<Vec<f64>>,
    /// Density of the unit-cell reference for periodic fields.
    #[arg(long, global = true)]
    reference_nodes_per_unit: Option<f64>,
    /// Box radius of the regularized Dirichlet reference.
    #[arg(long = "reference-R", global = true)]
    reference_r: Option<f64>,
    /// Regularization time of the regularized Dirichlet reference.
    #[arg(long = "reference-T", global = true)]
    reference_t: Option<f64>,
    /// Density of the regularized Dirichlet reference.
    #[arg(long, global = true)]
    reference_preset_nodes_per_unit: Option<f64>,
    /// Also write log10 plot data to this file.
    #[arg(long, global = true)]
    plot_data: Option<PathBuf>,
    /// Record wall times in the seconds column.
    #[arg(long, global = true)]
    timing: bool,
    /// Modulus sampling: y points per axis.
    #[arg(long, global = true)]
    y_points: Option<usize>,
    /// Modulus sampling: t points per axis.
    #[arg(long, global = true)]
    t_points: Option<usize>,
    /// Modulus sampling: z grid step.
    #[arg(long, global = true)]
    z_step: Option<f64>,
}

fn parse_form(s: &str) -> Result<TensorForm, String> {
    match s {
        "flux" => Ok(TensorForm::Flux),
        "energy" => Ok(TensorForm::Energy),
        _ => Err(format!("unknown form `{s}` (flux, energy)")),
    }
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig, CliError> {
        let inline = match &self.inline {
            Some(text) => Some(
                serde_json::from_str::<FieldJson>(text)
                    .map_err(|e| CliError::Validation(format!("--inline: {e}")))?,
            ),
            None => None,
        };
        Ok(RunConfig {
            builtin: self.builtin.clone(),
            inline,
            scheme: self.scheme.clone(),
            ell: self.ell,
            r: self.r,
            tinv: self.tinv,
            nodes_per_unit: self.nodes_per_unit,
            preset: self.preset.clone(),
            out: self.out.clone(),
            jobs: self.jobs,
            form: self.form,
            r_outer: self.r_outer,
            r_inner: self.r_inner,
            eta: self.eta.clone(),
            modes: self.modes,
            h: self.h,
            gradient: self.gradient.then_some(true),
            hessian: self.hessian.then_some(true),
            kind: self.kind,
            r_list: self.r_list.clone(),
            t_list: self.t_list.clone(),
            l_list: self.l_list.clone(),
            reference_nodes_per_unit: self.reference_nodes_per_unit,
            reference_r: self.reference_r,
            reference_t: self.reference_t,
            reference_preset_nodes_per_unit: self.reference_preset_nodes_per_unit,
            plot_data: self.plot_data.clone(),
            timing: self.timing.then_some(true),
            y_points: self.y_points,
            t_points: self.t_points,
            z_step: self.z_step,
        })
    }
}

fn jobs_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("APXHOMOG_JOBS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Validation(format!("APXHOMOG_JOBS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.flags.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let flags = cli.flags.to_config()?;
    cfg.overlay(&flags);
    if flags.jobs.is_none() {
        if let Some(j) = jobs_from_env()? {
            cfg.jobs = Some(j);
        }
    }
    cfg.fill_defaults();
    commands::fill_command_defaults(cli.command, &mut cfg);
    eprintln!(
        "{}",
        serde_json::to_string(&cfg).map_err(|e| CliError::Failure(format!("cannot echo config: {e}")))?
    );
    commands::dispatch(cli.command, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
