use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Dense complex matrix.
///
/// Entries are always finite once a matrix leaves a validated constructor.
/// Zero-column matrices are permitted only as the basis of an empty subspace.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(Mat<c64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(Mat::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self(Mat::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row vectors, rejecting ragged, empty or non-finite input.
    pub fn from_rows(rows: &[Vec<c64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid("matrix", "matrix must have at least one row and column"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                context: "ragged matrix rows",
                expected: n_cols,
                found: bad.len(),
            });
        }
        let m = Self::from_fn(n_rows, n_cols, |i, j| rows[i][j]);
        m.ensure_finite()?;
        Ok(m)
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<c64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn from_diag(diag: &[c64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { c64::new(0.0, 0.0) })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(diag[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[c64], v: &[c64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix unit E_ij of size n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = c64::new(1.0, 0.0);
        m
    }

    pub fn from_faer(m: Mat<c64>) -> Self {
        Self(m)
    }

    pub fn as_faer(&self) -> MatRef<'_, c64> {
        self.0.as_ref()
    }

    pub fn into_faer(self) -> Mat<c64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.nrows())
        } else {
            Err(Error::NonSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Iterates entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = c64> + '_ {
        let (r, c) = (self.nrows(), self.ncols());
        (0..c).flat_map(move |j| (0..r).map(move |i| self.0[(i, j)]))
    }

    pub fn map(&self, mut f: impl FnMut(c64) -> c64) -> Self {
        Self::from_fn(self.nrows(), self.ncols(), |i, j| f(self.0[(i, j)]))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose().to_owned())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conjugate().to_owned())
    }

    pub fn scale(&self, s: c64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols(), rhs.nrows(), "matmul shape mismatch");
        Self(&self.0 * &rhs.0)
    }

    pub fn mul_vec(&self, v: &[c64]) -> Vec<c64> {
        assert_eq!(self.ncols(), v.len(), "matrix-vector shape mismatch");
        let x = Mat::from_fn(v.len(), 1, |i, _| v[i]);
        let y = &self.0 * &x;
        (0..y.nrows()).map(|i| y[(i, 0)]).collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (r2, c2) = (rhs.nrows(), rhs.ncols());
        Self::from_fn(self.nrows() * r2, self.ncols() * c2, |i, j| {
            self.0[(i / r2, j / c2)] * rhs.0[(i % r2, j % c2)]
        })
    }

    pub fn trace(&self) -> c64 {
        (0..self.nrows().min(self.ncols())).map(|i| self.0[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<c64> {
        (0..self.nrows().min(self.ncols())).map(|i| self.0[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<c64> {
        (0..self.nrows()).map(|i| self.0[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<c64>> {
        (0..self.ncols()).map(|j| self.column(j)).collect()
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.ncols())
            .map(|j| (0..self.nrows()).map(|i| self.0[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value). NaN if the SVD fails to converge.
    pub fn norm_spectral(&self) -> f64 {
        if self.nrows() == 0 || self.ncols() == 0 {
            return 0.0;
        }
        match self.0.singular_values() {
            Ok(s) => s.first().copied().unwrap_or(0.0),
            Err(_) => f64::NAN,
        }
    }

    /// max |A - A†|
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.nrows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j.min(self.ncols().saturating_sub(1)) {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Self {
        let n = self.nrows();
        Self::from_fn(n, n, |i, j| (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5)
    }

    /// Column-stacking vectorization: `vec(X)[i + j*rows] = X[i, j]`.
    pub fn vectorize(&self) -> Vec<c64> {
        self.entries().collect()
    }

    /// Inverse of [`ComplexMatrix::vectorize`] for a square `d x d` matrix.
    pub fn unvectorize(v: &[c64], d: usize) -> Self {
        assert_eq!(v.len(), d * d, "vector length is not d^2");
        Self::from_fn(d, d, |i, j| v[i + j * d])
    }

    /// Rows/columns `0..k` of `self` restricted to the given index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = c64;
    fn index(&self, idx: (usize, usize)) -> &c64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut c64 {
        &mut self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 -= &rhs.0;
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.nrows(), self.ncols())?;
        if self.nrows() * self.ncols() > 400 {
            return write!(f, "  ... ]");
        }
        for i in 0..self.nrows() {
            write!(f, " ")?;
            for j in 0..self.ncols() {
                let z = self.0[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨u, v⟩, antilinear in `u`.
pub fn vec_dot(u: &[c64], v: &[c64]) -> c64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}
