//! Sampled modulus of almost periodicity
//! `ρ(A, L) = sup_y inf_{|z| ≤ L} sup_t |A(t + y) − A(t + z)|`.
//!
//! The suprema and infimum run over finite grids, so the result is a
//! lower-biased, reproducible estimate.

use serde::{Deserialize, Serialize};

use super::{CoefficientField, Point};

/// Extent of the `y` grid `[0, E]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum YExtent {
    /// `E = factor · L`.
    Scaled(f64),
    /// `E` independent of `L`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusSampling {
    /// Points per axis of the `y` grid (endpoints included).
    pub y_points_per_axis: usize,
    pub y_extent: YExtent,
    /// Step of the `z` grid `{i·s : |i·s|_∞ ≤ L}`; `None` means `min(0.05, L/40)`.
    pub z_step: Option<f64>,
    /// Points per axis of the half-open `t` grid `[0, t_extent)^d`.
    pub t_points_per_axis: usize,
    pub t_extent: f64,
}

impl Default for ModulusSampling {
    fn default() -> Self {
        ModulusSampling {
            y_points_per_axis: 9,
            y_extent: YExtent::Scaled(10.0),
            z_step: None,
            t_points_per_axis: 64,
            t_extent: 4.0,
        }
    }
}

impl ModulusSampling {
    pub fn z_step_for(&self, l: f64) -> f64 {
        self.z_step.unwrap_or_else(|| (l / 40.0).min(0.05))
    }

    fn y_extent_for(&self, l: f64) -> f64 {
        match self.y_extent {
            YExtent::Scaled(f) => f * l,
            YExtent::Fixed(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub l: f64,
    pub rho: f64,
    pub sampling: ModulusSampling,
}

fn grid_nd(d: usize, coords: &[f64]) -> Vec<Point> {
    if d == 1 {
        coords.iter().map(|&c| [c, 0.0]).collect()
    } else {
        let mut out = Vec::with_capacity(coords.len() * coords.len());
        for &b in coords {
            for &a in coords {
                out.push([a, b]);
            }
        }
        out
    }
}

/// Upper-triangle entries of `A(p)` packed in a fixed order.
fn packed(field: &CoefficientField, p: Point) -> [f64; 3] {
    let m = field.value(p);
    [m[0][0], m[0][1], m[1][1]]
}

fn max_entry_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs()).max((a[2] - b[2]).abs())
}

/// Sampled `ρ(A, L)` using the max-entry norm.
pub fn modulus_rho(field: &CoefficientField, l: f64, sampling: &ModulusSampling) -> ModulusEstimate {
    assert!(l > 0.0, "L must be positive");
    let d = field.dim();

    let ny = sampling.y_points_per_axis.max(1);
    let ext = sampling.y_extent_for(l);
    let ycoords: Vec<f64> = (0..ny)
        .map(|i| if ny == 1 { 0.0 } else { ext * i as f64 / (ny - 1) as f64 })
        .collect();
    let ys = grid_nd(d, &ycoords);

    let nt = sampling.t_points_per_axis.max(1);
    let tcoords: Vec<f64> = (0..nt).map(|i| sampling.t_extent * i as f64 / nt as f64).collect();
    let ts = grid_nd(d, &tcoords);

    let step = sampling.z_step_for(l);
    let m = (l / step + 1e-9).floor() as i64;
    let zcoords: Vec<f64> = (-m..=m).map(|i| i as f64 * step).collect();
    let zs = grid_nd(d, &zcoords);

    // Visit t in a scattered order so early exits trigger quickly.
    let n = ts.len();
    let stride = scatter_stride(n);
    let order: Vec<usize> = (0..n).map(|i| (i * stride) % n).collect();

    let shift = |a: Point, b: Point| [a[0] + b[0], a[1] + b[1]];
    let yvals: Vec<Vec<[f64; 3]>> = ys
        .iter()
        .map(|&y| order.iter().map(|&k| packed(field, shift(ts[k], y))).collect())
        .collect();

    let mut best = vec![f64::INFINITY; ys.len()];
    let mut zvals: Vec<[f64; 3]> = Vec::with_capacity(n);
    for &z in &zs {
        zvals.clear();
        for (yi, yv) in yvals.iter().enumerate() {
            if best[yi] == 0.0 {
                continue;
            }
            let mut worst = 0.0f64;
            let mut pruned = false;
            for (k, yk) in yv.iter().enumerate() {
                if k == zvals.len() {
                    zvals.push(packed(field, shift(ts[order[k]], z)));
                }
                worst = worst.max(max_entry_diff(yk, &zvals[k]));
                if worst >= best[yi] {
                    pruned = true;
                    break;
                }
            }
            if !pruned {
                best[yi] = worst;
            }
        }
    }
    let rho = best.iter().copied().fold(0.0, f64::max);
    ModulusEstimate {
        l,
        rho,
        sampling: *sampling,
    }
}

/// A stride coprime to `n` near `0.618 n`.
fn scatter_stride(n: usize) -> usize {
    if n <= 2 {
        return 1;
    }
    let mut s = ((n as f64) * 0.618_033_988_75) as usize;
    s = s.max(1);
    while gcd(s, n) != 1 {
        s += 1;
    }
    s
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
