//! Coefficient matrix fields: expression language, benchmark matrices,
//! periodization and the sampled modulus of almost periodicity.

mod expr;
mod field;
mod modulus;
mod parse;
mod periodize;

pub use expr::{BinOp, Func, NamedConst, ScalarExpr};
pub use field::{coercivity_check, Builtin, CoefficientField, CoercivityReport, FieldJson, SampleGrid};
pub use modulus::{modulus_rho, ModulusEstimate, ModulusSampling, YExtent};
pub use parse::parse_expr;
pub use periodize::{periodize, PeriodizedField};

use thiserror::Error;

/// A point of the plane; unused coordinates are zero when `d = 1`.
pub type Point = [f64; 2];

/// A symmetric matrix value; only the leading `d×d` block is meaningful.
pub type Mat = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier {name:?} at {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("arity mismatch for {name:?} at {position}")]
    Arity { position: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("unsupported dimension {0}; expected 1 or 2")]
    Dimension(usize),
    #[error("entries must form a {d}x{d} array")]
    Shape { d: usize },
    #[error("entry ({k},{l}) differs from entry ({l},{k})")]
    Asymmetric { k: usize, l: usize },
    #[error("entry ({k},{l}) uses variable x_{axis} in a {d}-dimensional field")]
    Arity { k: usize, l: usize, axis: usize, d: usize },
    #[error("entry ({k},{l}): {source}")]
    Parse {
        k: usize,
        l: usize,
        #[source]
        source: ParseError,
    },
    #[error("divisor {value:e} too close to zero at {point:?}")]
    DivisionUnsafe { point: Point, value: f64 },
    #[error("not coercive: smallest sampled eigenvalue {alpha_est} at {point:?}")]
    NotCoercive { alpha_est: f64, point: Point },
    #[error("declared alpha {declared} exceeds sampled minimum eigenvalue {sampled} at {point:?}")]
    AlphaTooLarge { declared: f64, sampled: f64, point: Point },
    #[error("non-finite value at {point:?}")]
    NonFinite { point: Point },
    #[error("invalid field document: {0}")]
    Json(String),
}

/// Smallest and largest eigenvalue of the symmetric leading `d×d` block.
pub fn sym_eigen_range(m: &Mat, d: usize) -> (f64, f64) {
    if d == 1 {
        return (m[0][0], m[0][0]);
    }
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let rad = half.hypot(m[0][1]);
    (mean - rad, mean + rad)
}
