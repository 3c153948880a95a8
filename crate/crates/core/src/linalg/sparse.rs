use std::fmt::Write as _;

use num_complex::Complex64;

use super::scalar::Scalar;

/// Square sparse matrix in compressed row storage with sorted column indices.
///
/// Both triangles are stored; symmetry (or Hermitian symmetry) is a property of
/// the values written by the assembler, checked by [`SparseSym::max_asymmetry`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym<S> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<S>,
}

impl<S: Scalar> SparseSym<S> {
    /// Zero matrix with the given per-row column sets (deduplicated and sorted here).
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            assert!(row.iter().all(|&c| c < n), "column index out of range");
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        SparseSym {
            n,
            row_ptr,
            cols,
            vals: vec![S::zero(); nnz],
        }
    }

    /// Zero matrix on a CSR pattern whose rows are sorted and duplicate-free.
    pub fn from_csr_pattern(row_ptr: Vec<usize>, cols: Vec<usize>) -> Self {
        let n = row_ptr.len() - 1;
        assert_eq!(row_ptr[n], cols.len(), "row_ptr/cols mismatch");
        debug_assert!((0..n).all(|i| cols[row_ptr[i]..row_ptr[i + 1]].windows(2).all(|w| w[0] < w[1])));
        let nnz = cols.len();
        SparseSym {
            n,
            row_ptr,
            cols,
            vals: vec![S::zero(); nnz],
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, S)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(r, c, _) in triplets {
            rows[r].push(c);
        }
        let mut m = Self::from_pattern(rows);
        for &(r, c, v) in triplets {
            m.add(r, c, v);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let trip: Vec<_> = (0..n).map(|i| (i, i, S::from_real(1.0))).collect();
        Self::from_triplets(n, &trip)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let trip: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, S::from_real(v))).collect();
        Self::from_triplets(diag.len(), &trip)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Same pattern, all values zero.
    pub fn zeros_like(&self) -> Self {
        SparseSym {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: vec![S::zero(); self.vals.len()],
        }
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.cols[lo..hi].binary_search(&col).ok().map(|k| lo + k)
    }

    /// Adds `v` at `(row, col)`; the position must be in the pattern.
    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: S) {
        let k = self
            .slot(row, col)
            .unwrap_or_else(|| panic!("({row}, {col}) not in sparsity pattern"));
        self.vals[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.slot(row, col).map_or(S::zero(), |k| self.vals[k])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = S::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Real part of the diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).re()).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `a·self + b·other`; the patterns must coincide.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert!(
            self.row_ptr == other.row_ptr && self.cols == other.cols,
            "lin_comb requires identical sparsity patterns"
        );
        SparseSym {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self
                .vals
                .iter()
                .zip(&other.vals)
                .map(|(&x, &y)| x.scale(a) + y.scale(b))
                .collect(),
        }
    }

    /// `max |A_ij − conj(A_ji)|` over the stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let d = (self.vals[k] - self.get(j, i).conj()).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.vals[k].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.vals.iter().all(|v| v.is_finite())
    }

    /// Iterates `(row, col, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut d = vec![vec![S::zero(); self.n]; self.n];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    /// Plain-text coordinate dump, one `row col value` line per entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (i, j, v) in self.iter() {
            if S::IS_COMPLEX {
                let _ = writeln!(out, "{i} {j} {:e} {:e}", v.re(), v.im());
            } else {
                let _ = writeln!(out, "{i} {j} {:e}", v.re());
            }
        }
        out
    }
}

impl SparseSym<f64> {
    /// `self + i·im` on the shared pattern.
    pub fn to_complex(&self, im: Option<&SparseSym<f64>>) -> SparseSym<Complex64> {
        let vals = match im {
            Some(im) => {
                assert!(
                    self.row_ptr == im.row_ptr && self.cols == im.cols,
                    "to_complex requires identical sparsity patterns"
                );
                self.vals.iter().zip(&im.vals).map(|(&a, &b)| Complex64::new(a, b)).collect()
            }
            None => self.vals.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        };
        SparseSym {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseSym::<f64>::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.apply(&[1.0, 1.0]), vec![6.0, 2.0]);
        assert_eq!(m.max_asymmetry(), 0.0);
    }

    #[test]
    fn hermitian_asymmetry() {
        let i = Complex64::new(0.0, 1.0);
        let h = SparseSym::from_triplets(2, &[(0, 1, i), (1, 0, -i)]);
        assert_eq!(h.max_asymmetry(), 0.0);
        let n = SparseSym::from_triplets(2, &[(0, 1, i), (1, 0, i)]);
        assert_eq!(n.max_asymmetry(), 2.0);
    }
}
