//! Cell averages of discrete fields, evaluated with the assembly quadrature.

use super::assemble::{check_dims, coefficient_at};
use super::{DofMap, ElementView, FemError, Grid, ReferenceElement};
use crate::coeff::{Mat, Point, PeriodizedField};

/// Visits every quadrature point of the selected elements in element order.
/// Returns the total physical weight visited.
pub fn for_each_point<F>(
    grid: &Grid,
    dofmap: &DofMap,
    select: impl Fn(usize) -> bool,
    mut f: F,
) -> Result<f64, FemError>
where
    F: FnMut(&ElementView, &super::QuadPoint, Point, f64) -> Result<(), FemError>,
{
    let re = ReferenceElement::q1(grid.dim());
    let jac = grid.h().powi(grid.dim() as i32);
    let mut volume = 0.0;
    for e in 0..grid.element_count() {
        if !select(e) {
            continue;
        }
        let view = ElementView::new(grid, dofmap, e);
        for qp in re.points() {
            let w = qp.weight * jac;
            volume += w;
            f(&view, qp, view.point(qp), w)?;
        }
    }
    Ok(volume)
}

/// `(1/|Y|) ∫ u`.
pub fn cell_average(grid: &Grid, dofmap: &DofMap, u: &[f64]) -> Result<f64, FemError> {
    dofmap.check_len(u.len())?;
    let mut acc = 0.0;
    let vol = for_each_point(grid, dofmap, |_| true, |view, qp, _, w| {
        acc += w * view.value(&view.gather(u), qp);
        Ok(())
    })?;
    Ok(acc / vol)
}

/// `(1/|Y|) ∫ Σ_p a_kp ∂_p w` for the row `k` (zero-based) of `A`.
pub fn flux_average(
    grid: &Grid,
    dofmap: &DofMap,
    field: &PeriodizedField,
    w: &[f64],
    k: usize,
) -> Result<f64, FemError> {
    check_dims(grid, dofmap, field)?;
    dofmap.check_len(w.len())?;
    let d = grid.dim();
    let mut acc = 0.0;
    let vol = for_each_point(grid, dofmap, |_| true, |view, qp, x, wt| {
        let a = coefficient_at(field, x)?;
        let g = view.gradient(&view.gather(w), qp);
        let mut s = 0.0;
        for p in 0..d {
            s += a[k][p] * g[p];
        }
        acc += wt * s;
        Ok(())
    })?;
    Ok(acc / vol)
}

/// `(1/|Y|) ∫ a_kl` by the assembly quadrature.
pub fn coefficient_average(grid: &Grid, field: &PeriodizedField) -> Result<Mat, FemError> {
    let dm = DofMap::free(grid);
    let d = grid.dim();
    let mut acc = [[0.0; 2]; 2];
    let vol = for_each_point(grid, &dm, |_| true, |_, _, x, wt| {
        let a = coefficient_at(field, x)?;
        for k in 0..d {
            for l in 0..d {
                acc[k][l] += wt * a[k][l];
            }
        }
        Ok(())
    })?;
    for row in acc.iter_mut() {
        for v in row.iter_mut() {
            *v /= vol;
        }
    }
    Ok(acc)
}

/// `(1/|Y|) ∫ 1/a_kk` inverted: the harmonic mean of a diagonal entry.
pub fn harmonic_mean(grid: &Grid, field: &PeriodizedField, k: usize) -> Result<f64, FemError> {
    let dm = DofMap::free(grid);
    let mut acc = 0.0;
    let vol = for_each_point(grid, &dm, |_| true, |_, _, x, wt| {
        acc += wt / coefficient_at(field, x)?[k][k];
        Ok(())
    })?;
    Ok(vol / acc)
}

/// `(1/|W|) ∫_W (ξ + ∇w)·A(ξ + ∇w)` over the elements accepted by `select`.
pub fn energy_average(
    grid: &Grid,
    dofmap: &DofMap,
    field: &PeriodizedField,
    xi: [f64; 2],
    w: &[f64],
    select: impl Fn(usize) -> bool,
) -> Result<f64, FemError> {
    check_dims(grid, dofmap, field)?;
    dofmap.check_len(w.len())?;
    let d = grid.dim();
    let mut acc = 0.0;
    let vol = for_each_point(grid, dofmap, select, |view, qp, x, wt| {
        let a = coefficient_at(field, x)?;
        let g = view.gradient(&view.gather(w), qp);
        let v = [xi[0] + g[0], xi[1] + g[1]];
        let mut s = 0.0;
        for r in 0..d {
            for c in 0..d {
                s += v[r] * a[r][c] * v[c];
            }
        }
        acc += wt * s;
        Ok(())
    })?;
    Ok(acc / vol)
}

/// `(1/|Y|) ∫ |u|²` and `(1/|Y|) ∫ |∇u|²`.
pub fn l2_h1_averages(grid: &Grid, dofmap: &DofMap, u: &[f64]) -> Result<(f64, f64), FemError> {
    dofmap.check_len(u.len())?;
    let (mut l2, mut h1) = (0.0, 0.0);
    let vol = for_each_point(grid, dofmap, |_| true, |view, qp, _, wt| {
        let local = view.gather(u);
        let v = view.value(&local, qp);
        let g = view.gradient(&local, qp);
        l2 += wt * v * v;
        h1 += wt * (g[0] * g[0] + g[1] * g[1]);
        Ok(())
    })?;
    Ok((l2 / vol, h1 / vol))
}

/// `((1/|Y|) ∫ |∇u − ∇v|²)^{1/2}` for two dof vectors on the same grid.
pub fn gradient_difference_rms(
    grid: &Grid,
    map_u: &DofMap,
    u: &[f64],
    map_v: &DofMap,
    v: &[f64],
) -> Result<f64, FemError> {
    map_u.check_len(u.len())?;
    map_v.check_len(v.len())?;
    if !map_u.matches(grid) || !map_v.matches(grid) {
        return Err(FemError::InvalidGrid("dof maps built for different grids".into()));
    }
    let mut acc = 0.0;
    let vol = for_each_point(grid, map_u, |_| true, |view_u, qp, _, wt| {
        let view_v = ElementView::new(grid, map_v, view_u.index);
        let gu = view_u.gradient(&view_u.gather(u), qp);
        let gv = view_v.gradient(&view_v.gather(v), qp);
        let (a, b) = (gu[0] - gv[0], gu[1] - gv[1]);
        acc += wt * (a * a + b * b);
        Ok(())
    })?;
    Ok((acc / vol).sqrt())
}

/// Nodal interpolant of `f` as a dof vector.
pub fn interpolate(grid: &Grid, dofmap: &DofMap, f: impl Fn(Point) -> f64) -> Vec<f64> {
    (0..dofmap.dof_count())
        .map(|k| f(grid.node_point(dofmap.node_of(k))))
        .collect()
}
