use std::sync::Arc;

use super::{CoefficientField, Mat, Point};

/// Restriction of a field to the half-open cube `[o, o + ℓ)^d`, extended
/// periodically. The default origin centres the cube at zero.
#[derive(Debug, Clone)]
pub struct PeriodizedField {
    base: Arc<CoefficientField>,
    cell_side: f64,
    origin: Point,
}

/// Periodizes `field` on the centred cube of side `cell_side`.
pub fn periodize(field: CoefficientField, cell_side: f64) -> PeriodizedField {
    PeriodizedField::new(Arc::new(field), cell_side)
}

impl PeriodizedField {
    pub fn new(base: Arc<CoefficientField>, cell_side: f64) -> Self {
        assert!(cell_side > 0.0 && cell_side.is_finite(), "cell side must be positive");
        let o = -0.5 * cell_side;
        PeriodizedField {
            base,
            cell_side,
            origin: [o, o],
        }
    }

    /// Same field with the cube's lower corner at `origin`.
    pub fn with_origin(mut self, origin: Point) -> Self {
        self.origin = origin;
        self
    }

    /// Periodization on the cube of side `2πR`.
    pub fn from_radius(base: Arc<CoefficientField>, r: f64) -> Self {
        Self::new(base, 2.0 * std::f64::consts::PI * r)
    }

    pub fn base(&self) -> &CoefficientField {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<CoefficientField> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    /// `R = ℓ / 2π`.
    pub fn radius(&self) -> f64 {
        self.cell_side / (2.0 * std::f64::consts::PI)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    fn fold_axis(&self, v: f64, o: f64) -> f64 {
        let l = self.cell_side;
        if v >= o && v < o + l {
            return v;
        }
        let mut r = (v - o).rem_euclid(l);
        if r >= l {
            r = 0.0;
        }
        o + r
    }

    /// Maps `y` into the half-open base cube.
    pub fn fold(&self, y: Point) -> Point {
        let mut out = [0.0; 2];
        for k in 0..self.dim() {
            out[k] = self.fold_axis(y[k], self.origin[k]);
        }
        out
    }

    #[inline]
    pub fn value(&self, y: Point) -> Mat {
        self.base.value(self.fold(y))
    }
}
