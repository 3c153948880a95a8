//! Jacobi-preconditioned conjugate gradients for Hermitian positive
//! (semi)definite systems.

use super::scalar::{axpy, dot, norm, remove_mean, Scalar};
use super::{SolveError, SparseSym};

/// Anything that can apply a Hermitian operator and expose its diagonal.
pub trait LinearOperator<S: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[S], y: &mut [S]);
    /// Real diagonal used by the Jacobi preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

impl<S: Scalar> LinearOperator<S> for SparseSym<S> {
    fn dim(&self) -> usize {
        SparseSym::dim(self)
    }

    fn apply(&self, x: &[S], y: &mut [S]) {
        self.matvec(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        SparseSym::diagonal(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Target relative residual `‖Kx − b‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Work in the complement of the constant vector (singular periodic systems).
    pub project_constants: bool,
}

impl CgOptions {
    pub const DEFAULT_TOL: f64 = 1e-10;

    /// Default tolerance with the `50·n^{1/d}` iteration cap.
    pub fn for_problem(n: usize, d: usize, project_constants: bool) -> Self {
        let root = (n.max(1) as f64).powf(1.0 / d.max(1) as f64);
        CgOptions {
            tol: Self::DEFAULT_TOL,
            max_iter: ((50.0 * root).ceil() as usize).max(100),
            project_constants,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn true_residual<S: Scalar, A: LinearOperator<S>>(op: &A, x: &[S], b: &[S], project: bool) -> Vec<S> {
    let mut r = vec![S::zero(); b.len()];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
    if project {
        remove_mean(&mut r);
    }
    r
}

/// Solves `op · x = b`.
///
/// With `project_constants` the right-hand side, every residual, search
/// direction and the iterate are kept orthogonal to the constant vector, and
/// the returned solution has zero mean.
pub fn cg_solve<S: Scalar, A: LinearOperator<S>>(
    op: &A,
    b: &[S],
    opts: &CgOptions,
    x0: Option<&[S]>,
) -> Result<(Vec<S>, CgReport), SolveError> {
    let (x, report, converged) = cg_iterate(op, b, opts, x0)?;
    if converged {
        Ok((x, report))
    } else {
        Err(SolveError::NotConverged {
            iterations: report.iterations,
            residual: report.relative_residual,
        })
    }
}

/// Runs CG and returns the final iterate whether or not `opts.tol` was met;
/// only non-finite values are errors.
pub(crate) fn cg_iterate<S: Scalar, A: LinearOperator<S>>(
    op: &A,
    b: &[S],
    opts: &CgOptions,
    x0: Option<&[S]>,
) -> Result<(Vec<S>, CgReport, bool), SolveError> {
    let n = op.dim();
    assert_eq!(b.len(), n, "right-hand side length");
    let project = opts.project_constants;

    let mut rhs = b.to_vec();
    if project {
        remove_mean(&mut rhs);
    }
    let bnorm = norm(&rhs);
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![S::zero(); n],
    };
    if project {
        remove_mean(&mut x);
    }
    if bnorm == 0.0 {
        return Ok((
            vec![S::zero(); n],
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
            true,
        ));
    }
    if !rhs.iter().all(|v| v.is_finite()) {
        return Err(SolveError::NonFinite { iteration: 0 });
    }

    let inv_diag: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precondition = |r: &[S], z: &mut [S]| {
        for ((zi, ri), w) in z.iter_mut().zip(r).zip(&inv_diag) {
            *zi = ri.scale(*w);
        }
        if project {
            remove_mean(z);
        }
    };

    let mut iterations = 0usize;
    let mut q = vec![S::zero(); n];
    let mut z = vec![S::zero(); n];
    // A restart recomputes the true residual to shed recurrence drift.
    for _restart in 0..4 {
        let mut r = true_residual(op, &x, &rhs, project);
        let mut rel = norm(&r) / bnorm;
        if rel <= opts.tol {
            return Ok((
                x,
                CgReport {
                    iterations,
                    relative_residual: rel,
                },
                true,
            ));
        }
        precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re();
        while iterations < opts.max_iter {
            iterations += 1;
            op.apply(&p, &mut q);
            let pq = dot(&p, &q).re();
            let alpha = rz / pq;
            if !alpha.is_finite() {
                return Err(SolveError::NonFinite { iteration: iterations });
            }
            axpy(S::from_real(alpha), &p, &mut x);
            axpy(S::from_real(-alpha), &q, &mut r);
            if project {
                remove_mean(&mut r);
            }
            rel = norm(&r) / bnorm;
            if !rel.is_finite() {
                return Err(SolveError::NonFinite { iteration: iterations });
            }
            if rel <= opts.tol {
                break;
            }
            precondition(&r, &mut z);
            let rz_new = dot(&r, &z).re();
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = *zi + pi.scale(beta);
            }
        }
        if project {
            remove_mean(&mut x);
        }
        let true_rel = norm(&true_residual(op, &x, &rhs, project)) / bnorm;
        if true_rel <= opts.tol || iterations >= opts.max_iter {
            let report = CgReport {
                iterations,
                relative_residual: true_rel,
            };
            return Ok((x, report, true_rel <= opts.tol));
        }
    }
    let rel = norm(&true_residual(op, &x, &rhs, project)) / bnorm;
    Ok((
        x,
        CgReport {
            iterations,
            relative_residual: rel,
        },
        false,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(project: bool) -> CgOptions {
        CgOptions {
            tol: 1e-12,
            max_iter: 100,
            project_constants: project,
        }
    }

    #[test]
    fn identity_in_one_iteration() {
        let k = SparseSym::<f64>::identity(5);
        let b = [1.0, -2.0, 3.5, 0.25, 7.0];
        let (x, rep) = cg_solve(&k, &b, &opts(false), None).unwrap();
        assert_eq!(x, b.to_vec());
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn diagonal_solve() {
        let k = SparseSym::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
        let (x, _) = cg_solve(&k, &[1.0, 2.0, 3.0], &opts(false), None).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_laplacian_with_projection() {
        // Dense oracle: K = circulant(2, -1, 0, -1); K x = b with b = (1,-1,1,-1)
        // is solved by x = b/4 since b is the eigenvector for eigenvalue 4.
        let mut t = Vec::new();
        for i in 0..4 {
            t.push((i, i, 2.0));
            t.push((i, (i + 1) % 4, -1.0));
            t.push((i, (i + 3) % 4, -1.0));
        }
        let k = SparseSym::<f64>::from_triplets(4, &t);
        let (x, _) = cg_solve(&k, &[1.0, -1.0, 1.0, -1.0], &opts(true), None).unwrap();
        for (xi, e) in x.iter().zip([0.25, -0.25, 0.25, -0.25]) {
            assert!((xi - e).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_non_convergence_and_nan() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let k = SparseSym::<f64>::from_triplets(n, &t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let o = CgOptions {
            tol: 1e-14,
            max_iter: 3,
            project_constants: false,
        };
        assert!(matches!(cg_solve(&k, &b, &o, None), Err(SolveError::NotConverged { .. })));
        let mut bad = b.clone();
        bad[3] = f64::NAN;
        assert!(matches!(cg_solve(&k, &bad, &opts(false), None), Err(SolveError::NonFinite { .. })));
    }
}
