//! Small dense and tridiagonal linear algebra.
//!
//! Everything here is sized for one-dimensional P1 problems: tridiagonal
//! operators of dimension `N_h`, dense square matrices of dimension `N_h`
//! holding Lyapunov iterates or second moments, and an envelope Cholesky
//! factorization used to sample correlated Gaussians.

use crate::error::{Error, Result};

/// Square dense matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Rank-one matrix `x xᵀ`.
    pub fn outer(x: &[f64]) -> Self {
        Self::from_fn(x.len(), |i, j| x[i] * x[j])
    }

    /// Inverse of [`DenseMatrix::vec`]: rebuilds a matrix from its
    /// column-stacked entries.
    pub fn from_vec(v: &[f64]) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() {
            return Err(Error::InvalidArgument(format!(
                "vector length {} is not a perfect square",
                v.len()
            )));
        }
        Ok(Self::from_fn(n, |i, j| v[j * n + i]))
    }

    /// Column-stacked entries.
    pub fn vec(&self) -> Vec<f64> {
        let n = self.n;
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                v.push(self.data[i * n + j]);
            }
        }
        v
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] += value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        self.transpose_into(&mut out);
        out
    }

    /// Blocked transpose into `out`.
    pub fn transpose_into(&self, out: &mut DenseMatrix) {
        const BLOCK: usize = 32;
        let n = self.n;
        debug_assert_eq!(out.n, n);
        for ib in (0..n).step_by(BLOCK) {
            let ie = (ib + BLOCK).min(n);
            for jb in (0..n).step_by(BLOCK) {
                let je = (jb + BLOCK).min(n);
                for i in ib..ie {
                    for j in jb..je {
                        out.data[j * n + i] = self.data[i * n + j];
                    }
                }
            }
        }
    }

    /// Replaces the matrix by `(X + Xᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    /// `max |x_ij - x_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        assert_eq!(n, other.n, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `xᵀ X x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.mul_vec(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a * b).sum())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_scaled(&mut self, s: f64, other: &DenseMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Smallest eigenvalue of the symmetric part, via a dense symmetric
    /// eigensolve. Intended for small matrices in invariant checks.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut m = self.clone();
        m.symmetrize();
        nalgebra::SymmetricEigen::new(m.to_nalgebra())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Symmetric tridiagonal matrix: main diagonal plus a single stored
/// off-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct TriDiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl TriDiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument(
                "tridiagonal matrix needs dimension >= 1".into(),
            ));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                found: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    /// Constant-coefficient (Toeplitz) tridiagonal matrix.
    pub fn toeplitz(n: usize, diag: f64, off: f64) -> Result<Self> {
        Self::new(vec![diag; n], vec![off; n.saturating_sub(1)])
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![1.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn is_zero(&self) -> bool {
        self.diag.iter().chain(&self.off).all(|v| *v == 0.0)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &TriDiag) -> Result<TriDiag> {
        if other.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(TriDiag {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + s * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a + s * b).collect(),
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.mul_vec_into(x, &mut out);
        Ok(out)
    }

    /// `out = T x`; lengths must already match.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// `out += T x`.
    pub fn mul_vec_add(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            out[i] += acc;
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.mul_vec(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a * b).sum())
    }

    /// Frobenius inner product `⟨T, X⟩ = Σ T_ij X_ij`.
    pub fn frobenius_inner(&self, x: &DenseMatrix) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * x.get(i, i);
            if i + 1 < n {
                acc += self.off[i] * (x.get(i, i + 1) + x.get(i + 1, i));
            }
        }
        acc
    }

    /// `out += s * T` on the three stored bands.
    pub fn add_to_dense(&self, s: f64, out: &mut DenseMatrix) {
        let n = self.n();
        for i in 0..n {
            out.add_at(i, i, s * self.diag[i]);
            if i + 1 < n {
                out.add_at(i, i + 1, s * self.off[i]);
                out.add_at(i + 1, i, s * self.off[i]);
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n());
        self.add_to_dense(1.0, &mut m);
        m
    }

    /// `out = T X`, sweeping whole rows so the inner loop vectorizes.
    pub fn left_mul_into(&self, x: &DenseMatrix, out: &mut DenseMatrix) {
        let n = self.n();
        debug_assert_eq!(x.n(), n);
        for i in 0..n {
            let d = self.diag[i];
            let dst = out.row_mut(i);
            for (o, v) in dst.iter_mut().zip(x.row(i)) {
                *o = d * v;
            }
            if i > 0 {
                let a = self.off[i - 1];
                for (o, v) in dst.iter_mut().zip(x.row(i - 1)) {
                    *o += a * v;
                }
            }
            if i + 1 < n {
                let a = self.off[i];
                for (o, v) in dst.iter_mut().zip(x.row(i + 1)) {
                    *o += a * v;
                }
            }
        }
    }

    /// `out = X T`, a three-point stencil within each row.
    pub fn right_mul_into(&self, x: &DenseMatrix, out: &mut DenseMatrix) {
        let n = self.n();
        debug_assert_eq!(x.n(), n);
        for i in 0..n {
            let src = x.row(i);
            let dst = out.row_mut(i);
            for j in 0..n {
                dst[j] = self.diag[j] * src[j];
            }
            for j in 1..n {
                dst[j] += self.off[j - 1] * src[j - 1];
            }
            for j in 0..n - 1 {
                dst[j] += self.off[j] * src[j + 1];
            }
        }
    }
}

/// `LDLᵀ` factorization of a symmetric positive definite tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct TriDiagFactor {
    inv_pivot: Vec<f64>,
    // lower[i] multiplies row i-1 during the forward sweep; lower[0] unused
    lower: Vec<f64>,
}

pub fn factor_spd_tridiag(m: &TriDiag) -> Result<TriDiagFactor> {
    let n = m.n();
    let mut inv_pivot = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut pivot = m.diag[0];
    for i in 0..n {
        if i > 0 {
            lower[i] = m.off[i - 1] / pivot;
            pivot = m.diag[i] - lower[i] * m.off[i - 1];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotSpd { row: i, pivot });
        }
        inv_pivot[i] = 1.0 / pivot;
    }
    Ok(TriDiagFactor { inv_pivot, lower })
}

impl TriDiagFactor {
    #[inline]
    pub fn n(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Solves in place; `b.len()` must equal the dimension.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        for i in 1..n {
            b[i] -= self.lower[i] * b[i - 1];
        }
        for i in 0..n {
            b[i] *= self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.lower[i + 1] * b[i + 1];
        }
    }

    /// Solves `T Y = X` for every column of `X` at once, overwriting `X`.
    pub fn solve_columns(&self, x: &mut DenseMatrix) -> Result<()> {
        let n = self.n();
        if x.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.n(),
            });
        }
        let data = x.as_mut_slice();
        for i in 1..n {
            let l = self.lower[i];
            let (prev, cur) = data[(i - 1) * n..(i + 1) * n].split_at_mut(n);
            for (c, p) in cur.iter_mut().zip(prev.iter()) {
                *c -= l * p;
            }
        }
        for i in 0..n {
            let s = self.inv_pivot[i];
            data[i * n..(i + 1) * n].iter_mut().for_each(|v| *v *= s);
        }
        for i in (0..n - 1).rev() {
            let l = self.lower[i + 1];
            let (cur, next) = data[i * n..(i + 2) * n].split_at_mut(n);
            for (c, nx) in cur.iter_mut().zip(next.iter()) {
                *c -= l * nx;
            }
        }
        Ok(())
    }
}

/// Lower-triangular factor `F` with `F Fᵀ = C`, stored row by row from the
/// first structurally nonzero column (envelope storage).
#[derive(Clone, Debug)]
pub struct PsdFactor {
    n: usize,
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

/// Relative pivot threshold below which a pivot is treated as zero.
const PSD_PIVOT_TOL: f64 = 1e-12;

/// Envelope Cholesky factorization of a symmetric positive semidefinite
/// matrix. Pivots in `[-1e-12·tr(C), 1e-12·tr(C)]` are clamped to zero and
/// their column is dropped; more negative pivots are an error.
pub fn spd_factor_dense(c: &DenseMatrix) -> Result<PsdFactor> {
    let n = c.n();
    let trace: f64 = (0..n).map(|i| c.get(i, i)).sum();
    let tol = PSD_PIVOT_TOL * trace.abs();

    // first nonzero column of each row in the lower triangle
    let first: Vec<usize> = (0..n)
        .map(|i| (0..i).find(|&j| c.get(i, j) != 0.0).unwrap_or(i))
        .collect();
    let mut rows: Vec<Vec<f64>> = first.iter().enumerate().map(|(i, f)| vec![0.0; i - f + 1]).collect();

    for i in 0..n {
        for j in first[i]..=i {
            let start = first[i].max(first[j]);
            let mut sum = c.get(i, j);
            for k in start..j {
                sum -= rows[i][k - first[i]] * rows[j][k - first[j]];
            }
            if j < i {
                let pivot = rows[j][j - first[j]];
                rows[i][j - first[i]] = if pivot == 0.0 { 0.0 } else { sum / pivot };
            } else if sum > tol {
                rows[i][i - first[i]] = sum.sqrt();
            } else if sum >= -tol {
                rows[i][i - first[i]] = 0.0;
            } else {
                return Err(Error::NotPsd { row: i, pivot: sum });
            }
        }
    }
    Ok(PsdFactor { n, first, rows })
}

impl PsdFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || j < self.first[i] {
            0.0
        } else {
            self.rows[i][j - self.first[i]]
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, |i, j| self.get(i, j))
    }

    /// `out = s · F ξ`.
    pub fn mul_into(&self, xi: &[f64], s: f64, out: &mut [f64]) {
        for i in 0..self.n {
            let f = self.first[i];
            let acc: f64 = self.rows[i].iter().zip(&xi[f..=i]).map(|(a, b)| a * b).sum();
            out[i] = s * acc;
        }
    }
}

/// Dense Gaussian elimination with partial pivoting. Used as an oracle and
/// for small auxiliary systems.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let lu = a.to_nalgebra().lu();
    lu.solve(&nalgebra::DVector::from_column_slice(b))
        .map(|x| x.iter().cloned().collect())
        .ok_or_else(|| Error::InvalidInput("singular matrix".into()))
}
