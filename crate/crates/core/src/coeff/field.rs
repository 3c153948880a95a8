use serde::{Deserialize, Serialize};

use super::{parse_expr, sym_eigen_range, FieldError, Mat, Point, ScalarExpr};

/// Number of quasi-random points used to validate a field.
const VALIDATION_POINTS: usize = 10_000;
/// Half-width of the validation box `[-w, w)^d`.
const VALIDATION_HALF_WIDTH: f64 = 64.0;
/// Smallest admissible divisor magnitude.
const DIVISOR_FLOOR: f64 = 1e-6;

/// The benchmark matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    A1,
    A2,
    A3,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        match name.to_ascii_uppercase().as_str() {
            "A1" => Some(Builtin::A1),
            "A2" => Some(Builtin::A2),
            "A3" => Some(Builtin::A3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::A1 => "A1",
            Builtin::A2 => "A2",
            Builtin::A3 => "A3",
        }
    }

    /// Scalar multiplying the identity.
    pub fn scalar_text(self) -> &'static str {
        match self {
            Builtin::A1 => {
                "(2 + 1.8*sin(2*pi*x))/(2 + 1.8*cos(2*pi*y)) + (2 + sin(2*pi*y))/(2 + 1.8*cos(2*pi*x))"
            }
            Builtin::A2 => "1 + 30*(2 + sin(2*pi*x)*sin(2*pi*y))",
            Builtin::A3 => "4 + cos(2*pi*(x + y)) + cos(2*pi*sqrt2*(x + y))",
        }
    }

    /// Analytic (lower, upper) eigenvalue bounds.
    fn bounds(self) -> (f64, f64) {
        match self {
            // Each quotient is bounded separately: 0.2/3.8 + 1/3.8 and 3.8/0.2 + 3/0.2.
            Builtin::A1 => (1.2 / 3.8, 34.0),
            Builtin::A2 => (31.0, 91.0),
            Builtin::A3 => (2.0, 6.0),
        }
    }

    fn period(self) -> Option<Vec<f64>> {
        match self {
            Builtin::A1 | Builtin::A2 => Some(vec![1.0, 1.0]),
            Builtin::A3 => None,
        }
    }
}

/// Serialized form `{ "d", "entries", "alpha" }` with optional extras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldJson {
    pub d: usize,
    pub entries: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// A symmetric `d×d` coefficient field with coercivity metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    dim: usize,
    entries: Vec<ScalarExpr>,
    alpha: f64,
    sup_bound: f64,
    period_hint: Option<Vec<f64>>,
    name: String,
}

/// Uniform tensor grid `lo + i (hi - lo)/(n - 1)` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub points_per_axis: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            lo: 0.0,
            hi: 4.0,
            points_per_axis: 129,
        }
    }
}

impl SampleGrid {
    pub fn points(&self, d: usize) -> Vec<Point> {
        let n = self.points_per_axis.max(1);
        let coord = |i: usize| {
            if n == 1 {
                self.lo
            } else {
                self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(n.pow(d as u32));
        if d == 1 {
            out.extend((0..n).map(|i| [coord(i), 0.0]));
        } else {
            for j in 0..n {
                for i in 0..n {
                    out.push([coord(i), coord(j)]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub alpha_est: f64,
    pub ok: bool,
    /// Sample point attaining `alpha_est`.
    pub witness: Point,
}

/// Minimum over the grid of the smallest eigenvalue of `A(y)`.
pub fn coercivity_check(field: &CoefficientField, grid: &SampleGrid) -> CoercivityReport {
    let mut alpha_est = f64::INFINITY;
    let mut witness = [0.0; 2];
    for y in grid.points(field.dim()) {
        let (lo, _) = sym_eigen_range(&field.value(y), field.dim());
        if lo < alpha_est || lo.is_nan() {
            alpha_est = lo;
            witness = y;
            if lo.is_nan() {
                break;
            }
        }
    }
    CoercivityReport {
        alpha_est,
        ok: alpha_est > 0.0,
        witness,
    }
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic quasi-random validation points in `[-64, 64)^d`.
fn validation_points(d: usize) -> impl Iterator<Item = Point> {
    (1..=VALIDATION_POINTS).map(move |i| {
        let w = VALIDATION_HALF_WIDTH;
        let x = -w + 2.0 * w * halton(i, 2);
        let y = if d == 2 { -w + 2.0 * w * halton(i, 3) } else { 0.0 };
        [x, y]
    })
}

impl CoefficientField {
    /// Builds and validates a field. `alpha = None` takes the sampled minimum.
    pub fn new(
        dim: usize,
        entries: Vec<Vec<ScalarExpr>>,
        alpha: Option<f64>,
        period_hint: Option<Vec<f64>>,
        name: impl Into<String>,
    ) -> Result<Self, FieldError> {
        if !(1..=2).contains(&dim) {
            return Err(FieldError::Dimension(dim));
        }
        if entries.len() != dim || entries.iter().any(|row| row.len() != dim) {
            return Err(FieldError::Shape { d: dim });
        }
        for (k, row) in entries.iter().enumerate() {
            for (l, e) in row.iter().enumerate() {
                if e.arity() > dim {
                    return Err(FieldError::Arity {
                        k,
                        l,
                        axis: e.arity(),
                        d: dim,
                    });
                }
                if entries[l][k] != *e {
                    return Err(FieldError::Asymmetric { k, l });
                }
            }
        }
        if let Some(p) = &period_hint {
            if p.len() != dim || p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(FieldError::Json("period must list one positive length per axis".into()));
            }
        }
        let flat: Vec<ScalarExpr> = entries.into_iter().flatten().collect();

        let mut sampled_min = f64::INFINITY;
        let mut sampled_max = 0.0f64;
        let mut argmin = [0.0; 2];
        for y in validation_points(dim) {
            for e in &flat {
                for div in e.divisors() {
                    let v = div.eval(&y);
                    if !(v.abs() >= DIVISOR_FLOOR) {
                        return Err(FieldError::DivisionUnsafe { point: y, value: v });
                    }
                }
            }
            let m = eval_flat(&flat, dim, y);
            let (lo, hi) = sym_eigen_range(&m, dim);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(FieldError::NonFinite { point: y });
            }
            if lo < sampled_min {
                sampled_min = lo;
                argmin = y;
            }
            sampled_max = sampled_max.max(hi.abs()).max(lo.abs());
        }
        if sampled_min <= 0.0 {
            return Err(FieldError::NotCoercive {
                alpha_est: sampled_min,
                point: argmin,
            });
        }
        let alpha = match alpha {
            Some(a) if !(a > 0.0 && a.is_finite()) => {
                return Err(FieldError::Json(format!("alpha must be positive, got {a}")))
            }
            Some(a) if a > sampled_min => {
                return Err(FieldError::AlphaTooLarge {
                    declared: a,
                    sampled: sampled_min,
                    point: argmin,
                })
            }
            Some(a) => a,
            None => sampled_min,
        };
        Ok(CoefficientField {
            dim,
            entries: flat,
            alpha,
            sup_bound: sampled_max,
            period_hint,
            name: name.into(),
        })
    }

    /// `c·Id` in dimension `d`.
    pub fn constant(dim: usize, c: f64) -> Result<Self, FieldError> {
        Self::scalar(dim, ScalarExpr::Num(c), None, Some(vec![1.0; dim]), format!("const({c})"))
    }

    /// `s(y)·Id`.
    pub fn scalar(
        dim: usize,
        s: ScalarExpr,
        alpha: Option<f64>,
        period_hint: Option<Vec<f64>>,
        name: impl Into<String>,
    ) -> Result<Self, FieldError> {
        let entries = (0..dim)
            .map(|k| {
                (0..dim)
                    .map(|l| if k == l { s.clone() } else { ScalarExpr::Num(0.0) })
                    .collect()
            })
            .collect();
        Self::new(dim, entries, alpha, period_hint, name)
    }

    /// One of the benchmark matrices, with analytic coercivity and sup bounds.
    pub fn builtin(which: Builtin) -> Self {
        let s = parse_expr(which.scalar_text()).expect("builtin expression parses");
        let (alpha, sup) = which.bounds();
        let mut f = Self::scalar(2, s, Some(alpha), which.period(), which.name())
            .expect("builtin field validates");
        f.sup_bound = sup;
        f
    }

    pub fn from_json(doc: &FieldJson) -> Result<Self, FieldError> {
        let mut rows = Vec::with_capacity(doc.entries.len());
        for (k, row) in doc.entries.iter().enumerate() {
            let mut parsed = Vec::with_capacity(row.len());
            for (l, text) in row.iter().enumerate() {
                parsed.push(parse_expr(text).map_err(|source| FieldError::Parse { k, l, source })?);
            }
            rows.push(parsed);
        }
        let name = doc.name.clone().unwrap_or_else(|| "inline".to_string());
        Self::new(doc.d, rows, doc.alpha, doc.period.clone(), name)
    }

    pub fn from_json_str(text: &str) -> Result<Self, FieldError> {
        let doc: FieldJson = serde_json::from_str(text).map_err(|e| FieldError::Json(e.to_string()))?;
        Self::from_json(&doc)
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            d: self.dim,
            entries: (0..self.dim)
                .map(|k| (0..self.dim).map(|l| self.entry(k, l).to_string()).collect())
                .collect(),
            alpha: Some(self.alpha),
            period: self.period_hint.clone(),
            name: Some(self.name.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper bound (analytic for builtins, sampled otherwise) on `|A(y)|`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn period_hint(&self) -> Option<&[f64]> {
        self.period_hint.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entry(&self, k: usize, l: usize) -> &ScalarExpr {
        &self.entries[k * self.dim + l]
    }

    /// True when every entry is constant.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(ScalarExpr::is_constant)
    }

    /// `A(y)`; the upper triangle is evaluated and mirrored.
    #[inline]
    pub fn value(&self, y: Point) -> Mat {
        eval_flat(&self.entries, self.dim, y)
    }
}

#[inline]
fn eval_flat(entries: &[ScalarExpr], dim: usize, y: Point) -> Mat {
    let mut m = [[0.0; 2]; 2];
    let pt = &y[..dim];
    for k in 0..dim {
        for l in k..dim {
            let v = entries[k * dim + l].eval(pt);
            m[k][l] = v;
            m[l][k] = v;
        }
    }
    m
}
