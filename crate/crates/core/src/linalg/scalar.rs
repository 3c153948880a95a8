use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const IS_COMPLEX: bool;

    fn zero() -> Self;
    fn from_real(v: f64) -> Self;
    /// `re + i·im`; the imaginary part is dropped for real scalars.
    fn from_parts(re: f64, im: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;
    /// Quotient by a nonzero scalar.
    fn div(self, other: Self) -> Self;

    fn abs(self) -> f64 {
        self.abs2().sqrt()
    }

    /// Eigen-decomposition of a small dense Hermitian matrix given by rows.
    /// Returns eigenvalues in ascending order and the matching unit
    /// eigenvectors.
    fn hermitian_eig(a: &[Vec<Self>]) -> (Vec<f64>, Vec<Vec<Self>>);
}

fn sorted_eig<T: nalgebra::ComplexField<RealField = f64>>(
    a: nalgebra::DMatrix<T>,
) -> (Vec<f64>, Vec<Vec<T>>) {
    let n = a.nrows();
    // Exact Hermitian symmetry for the dense solver.
    let h = (&a + a.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
        .collect();
    (vals, vecs)
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_real(v: f64) -> Self {
        v
    }
    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn div(self, other: Self) -> Self {
        self / other
    }

    fn hermitian_eig(a: &[Vec<Self>]) -> (Vec<f64>, Vec<Vec<Self>>) {
        let n = a.len();
        sorted_eig(nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]))
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn div(self, other: Self) -> Self {
        self / other
    }

    fn hermitian_eig(a: &[Vec<Self>]) -> (Vec<f64>, Vec<Vec<Self>>) {
        let n = a.len();
        sorted_eig(nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]))
    }
}

/// `Σ conj(x_i) y_i`, summed in index order.
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = S::zero();
    for (a, b) in x.iter().zip(y) {
        acc += a.conj() * *b;
    }
    acc
}

pub fn norm<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

/// `y += a x`.
pub fn axpy<S: Scalar>(a: S, x: &[S], y: &mut [S]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Removes the arithmetic mean of `x`.
pub fn remove_mean<S: Scalar>(x: &mut [S]) {
    if x.is_empty() {
        return;
    }
    let mut sum = S::zero();
    for v in x.iter() {
        sum += *v;
    }
    let mean = sum.scale(1.0 / x.len() as f64);
    for v in x.iter_mut() {
        *v -= mean;
    }
}
