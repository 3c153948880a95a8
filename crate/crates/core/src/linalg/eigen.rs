//! Smallest eigenpairs of `K v = λ M v` by shifted block inverse iteration
//! with Rayleigh-Ritz projection.

use super::cg::{cg_iterate, CgOptions};
use super::scalar::{dot, norm, Scalar};
use super::{SolveError, SparseSym};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative residual target `‖Kv − λMv‖ ≤ tol (‖Kv‖ + |λ| ‖Mv‖)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Target value of `v^H M v`.
    pub norm_target: f64,
    /// Extra block columns used when more than one pair is requested.
    pub guard: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_iter: 500,
            norm_target: 1.0,
            guard: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult<S> {
    pub eigenvalue: f64,
    pub eigenvector: Vec<S>,
    pub residual: f64,
    pub iterations: usize,
}

fn m_norm<S: Scalar>(m: &SparseSym<S>, v: &[S]) -> f64 {
    dot(v, &m.apply(v)).re().max(0.0).sqrt()
}

/// Deterministic start vector for column `mode`: a smooth positive part plus
/// hashed noise, so distinct columns are linearly independent.
fn start_vector<S: Scalar>(n: usize, mode: usize) -> Vec<S> {
    let noise = |i: usize, salt: u64| {
        let mut z = (i as u64) ^ (mode as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n)
        .map(|i| {
            let t = i as f64;
            let re = 1.0 + 0.3 * (0.7 * t + 1.1 * mode as f64).sin() + 0.4 * noise(i, 1);
            let im = 0.2 * (1.9 * t + 0.3 * mode as f64).cos() + 0.4 * noise(i, 2);
            S::from_parts(re, im)
        })
        .collect()
}

/// M-orthonormalizes the columns in place by twice-repeated modified
/// Gram-Schmidt and returns their images under M. A column that collapses is
/// replaced by a fresh start vector.
fn m_orthonormalize<S: Scalar>(
    m: &SparseSym<S>,
    cols: &mut [Vec<S>],
    fresh: &mut usize,
) -> Result<Vec<Vec<S>>, SolveError> {
    let n = m.dim();
    let mut images: Vec<Vec<S>> = Vec::with_capacity(cols.len());
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = m_norm(m, &cols[j]);
            for _ in 0..2 {
                for (i, mv) in images.iter().enumerate() {
                    let c = dot(mv, &cols[j]);
                    let (head, tail) = cols.split_at_mut(j);
                    for (x, v) in tail[0].iter_mut().zip(&head[i]) {
                        *x -= c * *v;
                    }
                }
            }
            let after = m_norm(m, &cols[j]);
            if after.is_finite() && after > 1e-10 * before && after > 0.0 {
                for x in cols[j].iter_mut() {
                    *x = x.scale(1.0 / after);
                }
                break;
            }
            attempts += 1;
            if attempts > 3 {
                return Err(SolveError::DeflationBreakdown { residual: after });
            }
            *fresh += 1;
            cols[j] = start_vector(n, *fresh);
        }
        images.push(m.apply(&cols[j]));
    }
    Ok(images)
}

/// `Σ_a cols[a] c[a]`.
fn combine<S: Scalar>(cols: &[Vec<S>], c: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); cols[0].len()];
    for (col, &ca) in cols.iter().zip(c) {
        for (o, v) in out.iter_mut().zip(col) {
            *o += *v * ca;
        }
    }
    out
}

/// Returns the `count` smallest generalized eigenpairs in ascending order.
///
/// Block inverse iteration on `K + σM` with `σ = 10⁻⁸ trace(K)/trace(M)`, so
/// the constant kernel of periodic stiffness matrices needs no special
/// handling. Each sweep is followed by a Rayleigh-Ritz step on the block.
/// When more than one pair is wanted the block carries `guard` extra columns,
/// which keeps clustered eigenvalues from slowing convergence.
pub fn smallest_eigenpairs<S: Scalar>(
    k: &SparseSym<S>,
    m: &SparseSym<S>,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenResult<S>>, SolveError> {
    let n = k.dim();
    assert_eq!(m.dim(), n, "K and M dimensions differ");
    assert!(count >= 1 && count <= n, "count out of range");

    let sigma = (1e-8 * k.trace() / m.trace()).abs();
    let shifted = k.lin_comb(1.0, m, sigma);
    let inner = CgOptions {
        tol: (opts.tol * 1e-3).max(1e-13),
        max_iter: 20 * n + 100,
        project_constants: false,
    };
    // Residuals at rounding level count as converged.
    let floor = 1e3 * f64::EPSILON * (k.norm_inf() + sigma * m.norm_inf());
    let p = if count == 1 { 1 } else { (count + opts.guard).min(n) };

    let mut fresh = p;
    let mut x: Vec<Vec<S>> = (0..p).map(|j| start_vector(n, j)).collect();
    m_orthonormalize(m, &mut x, &mut fresh)?;
    let mut residuals = vec![f64::INFINITY; count];
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut y = Vec::with_capacity(p);
        for xj in &x {
            // The shifted system is nearly singular; an inner solve that stalls
            // above its tolerance still yields a usable inverse-iteration step.
            let (sol, _, _) = cg_iterate(&shifted, &m.apply(xj), &inner, Some(xj))?;
            if sol.iter().any(|v| !v.is_finite()) {
                return Err(SolveError::NonFinite { iteration: iterations });
            }
            y.push(sol);
        }
        let my = m_orthonormalize(m, &mut y, &mut fresh)?;
        let ky: Vec<Vec<S>> = y.iter().map(|v| k.apply(v)).collect();
        let kp: Vec<Vec<S>> = (0..p)
            .map(|a| (0..p).map(|b| dot(&y[a], &ky[b])).collect())
            .collect();
        let (vals, vecs) = S::hermitian_eig(&kp);
        x = vecs.iter().map(|c| combine(&y, c)).collect();
        let mut done = true;
        for j in 0..count {
            let kx = combine(&ky, &vecs[j]);
            let mx = combine(&my, &vecs[j]);
            let r: Vec<S> = kx.iter().zip(&mx).map(|(a, b)| *a - b.scale(vals[j])).collect();
            residuals[j] = norm(&r);
            let bound = opts.tol * (norm(&kx) + vals[j].abs() * norm(&mx));
            if residuals[j] > bound && residuals[j] > floor * norm(&x[j]) {
                done = false;
            }
        }
        if done {
            let s = opts.norm_target.sqrt();
            return Ok((0..count)
                .map(|j| {
                    // Ritz vectors of an M-orthonormal block have unit M-norm up to rounding.
                    let nj = m_norm(m, &x[j]);
                    EigenResult {
                        eigenvalue: vals[j],
                        eigenvector: x[j].iter().map(|v| v.scale(s / nj)).collect(),
                        residual: residuals[j],
                        iterations,
                    }
                })
                .collect());
        }
    }
    let (mode, residual) = residuals
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (j, &r)| if r > acc.1 { (j, r) } else { acc });
    Err(SolveError::EigenNotConverged {
        mode: mode + 1,
        iterations,
        residual,
    })
}
