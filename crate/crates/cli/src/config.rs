//! Run configuration: JSON file, command-line overrides, defaults and
//! validation.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use apxhomog::cell::{ReferencePreset, Scheme, TensorForm};
use apxhomog::coeff::{Builtin, CoefficientField, FieldJson, ModulusSampling};
use apxhomog::fem::MeshSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PRESET_LABEL: &str = "100+R^2";

/// Sweep variants of the `study` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Tensor error against a reference over the R list.
    Tensor,
    /// Regularized-vs-exact periodic gap over the T list at fixed R.
    Regularization,
    /// Gradient distance between periodic and Dirichlet correctors over the R list.
    Difference,
    /// Second Bloch eigenvalue at η = 0 over the R list.
    Gap,
}

/// Every knob of a run. Absent entries take defaults; the filled-in config is
/// echoed so that reloading it reproduces the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<FieldJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, rename = "Tinv", skip_serializing_if = "Option::is_none")]
    pub tinv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_per_unit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<TensorForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_outer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<StudyKind>,
    #[serde(default, rename = "R_list", skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    #[serde(default, rename = "T_list", skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    #[serde(default, rename = "L_list", skip_serializing_if = "Option::is_none")]
    pub l_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_nodes_per_unit: Option<f64>,
    #[serde(default, rename = "reference_R", skip_serializing_if = "Option::is_none")]
    pub reference_r: Option<f64>,
    #[serde(default, rename = "reference_T", skip_serializing_if = "Option::is_none")]
    pub reference_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_preset_nodes_per_unit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_step: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

/// Reads and schema-checks a JSON config; errors name the offending field.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.inner().to_string()
        } else {
            format!("field `{path}`: {}", e.inner())
        }
    })
}

impl RunConfig {
    /// Applies `flags` on top of `self`. A coefficient source, cell size or
    /// mesh given on the command line replaces its counterpart from the file.
    pub fn overlay(&mut self, flags: &RunConfig) {
        if flags.builtin.is_some() || flags.inline.is_some() {
            self.builtin = None;
            self.inline = None;
        }
        if flags.ell.is_some() || flags.r.is_some() {
            self.ell = None;
            self.r = None;
        }
        if flags.nodes_per_unit.is_some() || flags.preset.is_some() {
            self.nodes_per_unit = None;
            self.preset = None;
        }
        overlay!(self, flags;
            builtin, inline, scheme, ell, r, tinv, nodes_per_unit, preset, out, jobs, form,
            r_outer, r_inner, eta, modes, h, gradient, hessian, kind, r_list, t_list, l_list,
            reference_nodes_per_unit, reference_r, reference_t, reference_preset_nodes_per_unit,
            plot_data, timing, y_points, t_points, z_step,
        );
    }

    /// Fills the defaults shared by every subcommand.
    pub fn fill_defaults(&mut self) {
        if self.ell.is_none() && self.r.is_none() {
            self.ell = Some(1.0);
        }
        if self.nodes_per_unit.is_none() && self.preset.is_none() {
            self.nodes_per_unit = Some(100.0);
        }
        self.scheme.get_or_insert_with(|| "P".into());
        self.tinv.get_or_insert(0.0);
        self.jobs.get_or_insert(1);
        self.timing.get_or_insert(false);
    }
}

/// Validated view of a [`RunConfig`].
pub struct Resolved {
    pub field: Arc<CoefficientField>,
    pub scheme: Scheme,
    pub ell: f64,
    pub r: f64,
    pub tinv: f64,
    pub mesh: MeshSpec,
    pub jobs: usize,
    pub timing: bool,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn positive_list(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(invalid(format!("{name} is empty")));
    }
    v.iter().try_for_each(|&x| positive(name, x).map(|_| ()))
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let field = match (&self.builtin, &self.inline) {
            (Some(_), Some(_)) => return Err(invalid("`builtin` and `inline` are mutually exclusive")),
            (None, None) => return Err(invalid("missing coefficient source: set `builtin` or `inline`")),
            (Some(name), None) => CoefficientField::builtin(
                Builtin::from_name(name).ok_or_else(|| invalid(format!("unknown builtin `{name}` (A1, A2, A3)")))?,
            ),
            (None, Some(doc)) => {
                CoefficientField::from_json(doc).map_err(|e| invalid(format!("field `inline`: {e}")))?
            }
        };
        let scheme_name = self.scheme.as_deref().unwrap_or("P");
        let scheme = Scheme::from_name(scheme_name)
            .ok_or_else(|| invalid(format!("unknown scheme `{scheme_name}` (P, PT, D, DT, window)")))?;
        let (ell, r) = match (self.ell, self.r) {
            (Some(_), Some(_)) => return Err(invalid("`ell` and `R` are mutually exclusive")),
            (Some(l), None) => (positive("ell", l)?, l / (2.0 * PI)),
            (None, Some(r)) => (2.0 * PI * positive("R", r)?, r),
            (None, None) => (1.0, 1.0 / (2.0 * PI)),
        };
        let tinv = self.tinv.unwrap_or(0.0);
        if !(tinv >= 0.0 && tinv.is_finite()) {
            return Err(invalid(format!("Tinv must be nonnegative, got {tinv}")));
        }
        let mesh = match (self.nodes_per_unit, self.preset.as_deref()) {
            (Some(_), Some(_)) => return Err(invalid("`nodes_per_unit` and `preset` are mutually exclusive")),
            (Some(n), None) => MeshSpec::NodesPerUnit(positive("nodes_per_unit", n)?),
            (None, Some(PRESET_LABEL)) => MeshSpec::HundredPlusRSquared,
            (None, Some(p)) => return Err(invalid(format!("unknown preset `{p}` (only `{PRESET_LABEL}`)"))),
            (None, None) => MeshSpec::NodesPerUnit(100.0),
        };
        let jobs = self.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(invalid("jobs must be at least 1"));
        }
        Ok(Resolved {
            field: Arc::new(field),
            scheme,
            ell,
            r,
            tinv,
            mesh,
            jobs,
            timing: self.timing.unwrap_or(false),
        })
    }

    pub fn reference_preset(&self) -> Result<ReferencePreset, CliError> {
        let d = ReferencePreset::default();
        let npu = match d.mesh {
            MeshSpec::NodesPerUnit(n) => n,
            MeshSpec::HundredPlusRSquared => unreachable!("default preset uses a fixed density"),
        };
        Ok(ReferencePreset {
            r: positive("reference_R", self.reference_r.unwrap_or(d.r))?,
            t: positive("reference_T", self.reference_t.unwrap_or(d.t))?,
            mesh: MeshSpec::NodesPerUnit(positive(
                "reference_preset_nodes_per_unit",
                self.reference_preset_nodes_per_unit.unwrap_or(npu),
            )?),
        })
    }

    pub fn sampling(&self) -> Result<ModulusSampling, CliError> {
        let d = ModulusSampling::default();
        let s = ModulusSampling {
            y_points_per_axis: self.y_points.unwrap_or(d.y_points_per_axis),
            t_points_per_axis: self.t_points.unwrap_or(d.t_points_per_axis),
            z_step: self.z_step.or(d.z_step),
            ..d
        };
        if s.y_points_per_axis == 0 || s.t_points_per_axis == 0 {
            return Err(invalid("sampling point counts must be positive"));
        }
        if let Some(z) = s.z_step {
            positive("z_step", z)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let mut c = parse_config(r#"{"builtin":"A2","scheme":"P"}"#).unwrap();
        c.fill_defaults();
        assert_eq!(c.ell, Some(1.0));
        assert_eq!(c.nodes_per_unit, Some(100.0));
        let r = c.resolve().unwrap();
        assert_eq!(r.mesh, MeshSpec::NodesPerUnit(100.0));
        assert_eq!(r.scheme, Scheme::P);
    }

    #[test]
    fn missing_source_is_named() {
        let e = parse_config(r#"{"scheme":"P"}"#).unwrap().resolve().err().unwrap();
        assert!(e.to_string().contains("builtin"), "{e}");
    }

    #[test]
    fn both_sources_rejected() {
        let c = parse_config(r#"{"builtin":"A1","inline":{"d":1,"entries":[["3"]]}}"#).unwrap();
        assert!(c.resolve().err().unwrap().to_string().contains("mutually exclusive"));
    }

    #[test]
    fn schema_errors_carry_field_path() {
        let e = parse_config(r#"{"builtin":"A1","R_list":[1,"x"]}"#).unwrap_err();
        assert!(e.contains("R_list"), "{e}");
        let e = parse_config(r#"{"builtn":"A1"}"#).unwrap_err();
        assert!(e.contains("builtn"), "{e}");
    }

    #[test]
    fn flags_override_file() {
        let mut file = parse_config(r#"{"builtin":"A1","ell":2,"nodes_per_unit":5}"#).unwrap();
        let flags = RunConfig {
            inline: Some(FieldJson {
                d: 1,
                entries: vec![vec!["3".into()]],
                alpha: None,
                period: None,
                name: None,
            }),
            r: Some(1.0),
            preset: Some(PRESET_LABEL.into()),
            ..RunConfig::default()
        };
        file.overlay(&flags);
        assert!(file.builtin.is_none() && file.ell.is_none() && file.nodes_per_unit.is_none());
        let r = file.resolve().unwrap();
        assert!((r.ell - 2.0 * PI).abs() < 1e-15);
        assert_eq!(r.mesh, MeshSpec::HundredPlusRSquared);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = parse_config(r#"{"builtin":"A3","R":2.5,"T_list":[4,8]}"#).unwrap();
        c.fill_defaults();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
