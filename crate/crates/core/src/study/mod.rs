//! Convergence sweeps over `R`, `T` and `L`, rate fits and CSV emission.

mod csv;
mod fit;
mod pool;
mod sweep;

pub use csv::{plot_data, records_to_csv, CSV_HEADER};
pub use fit::{fit_rate, RateFit};
pub use pool::run_pool;
pub use sweep::{
    default_reference, sweep_corrector_difference, sweep_modulus, sweep_regularization, sweep_tensor,
    scheme_tensor, CorrectorSweep, DifferenceRecord, ModulusSweep, RegularizationSweep, StudyRecord,
    SweepOptions, TauFit,
};

use thiserror::Error;

use crate::cell::CellError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StudyError {
    #[error("rate fit needs at least 3 points with positive error, got {0}")]
    InsufficientPoints(usize),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("invalid sweep: {0}")]
    Invalid(String),
}
