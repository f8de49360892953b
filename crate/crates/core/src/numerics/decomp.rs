use faer::linalg::solvers::Solve;
use faer::{c64, Side};

use super::matrix::{vec_dot, vec_norm, ComplexMatrix};
use super::Tolerances;
use crate::error::{Error, Result};

/// Eigenvalue with a unit-norm right eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: c64,
    pub vector: Vec<c64>,
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
///
/// Singular values at or below `nullspace_rel · σ_max` count as zero. A zero
/// matrix yields the full space.
pub fn nullspace(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    nullspace_scaled(m, 0.0, tol)
}

/// Like [`nullspace`], but the cutoff is `nullspace_rel · max(σ_max, scale)`. Used when `m` is
/// a compression of a larger operator of norm `scale`, so that an almost-zero compression is
/// recognised as zero.
pub fn nullspace_scaled(m: &ComplexMatrix, scale: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    m.ensure_finite()?;
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    if rows == 0 {
        return Ok(ComplexMatrix::identity(cols));
    }
    let svd = m.as_faer().svd().map_err(|_| Error::SvdFailure)?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let sigma_max = s[0].re.max(scale);
    if sigma_max == 0.0 {
        return Ok(ComplexMatrix::identity(cols));
    }
    let cut = tol.nullspace_rel * sigma_max;
    let rank = (0..rows.min(cols)).filter(|&i| s[i].re > cut).count();
    Ok(ComplexMatrix::from_fn(cols, cols - rank, |i, j| v[(i, rank + j)]))
}

/// Orthonormal basis of the column range of `m`, cut at `rel · σ_max`.
pub fn range_basis(m: &ComplexMatrix, rel: f64) -> Result<ComplexMatrix> {
    m.ensure_finite()?;
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Ok(ComplexMatrix::zeros(rows, 0));
    }
    let svd = m.as_faer().svd().map_err(|_| Error::SvdFailure)?;
    let s = svd.S().column_vector();
    let u = svd.U();
    let sigma_max = s[0].re;
    if sigma_max == 0.0 {
        return Ok(ComplexMatrix::zeros(rows, 0));
    }
    let rank = (0..rows.min(m.ncols()))
        .filter(|&i| s[i].re > rel * sigma_max)
        .count();
    Ok(ComplexMatrix::from_fn(rows, rank, |i, j| u[(i, j)]))
}

/// Orthonormal basis of ker((M − λI)^power).
///
/// Built as the chain of iterated kernels K₁ = ker B, K_{j+1} = ker((I − P_{K_j}) B)
/// with B = M − λI, which spans the same space as the kernel of the power
/// without forming it. The chain stops early once it stops growing.
pub fn generalized_eigenspace(
    m: &ComplexMatrix,
    lambda: c64,
    power: usize,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    if power == 0 {
        return Err(Error::invalid("power", "must be at least 1"));
    }
    let mut b = m.clone();
    for i in 0..n {
        b[(i, i)] -= lambda;
    }
    let mut k = nullspace(&b, tol)?;
    for _ in 1..power {
        if k.ncols() == 0 || k.ncols() == n {
            break;
        }
        let p = k.matmul(&k.adjoint());
        let c = &b - &p.matmul(&b);
        let next = nullspace(&c, tol)?;
        if next.ncols() <= k.ncols() {
            break;
        }
        k = next;
    }
    Ok(k)
}

/// All eigenvalues with multiplicity.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<c64>> {
    m.ensure_square()?;
    m.ensure_finite()?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.as_faer().eigenvalues().map_err(|_| Error::EigenFailure)
}

/// Complete eigen-decomposition; every pair is checked against ‖Mv − λv‖ ≤ 1e-8·‖M‖.
pub fn eigen_full(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let n = m.ensure_square()?;
    m.ensure_finite()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let evd = m.as_faer().eigen().map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let bound = 1e-8 * m.norm_fro().max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<c64> = (0..n).map(|i| u[(i, j)]).collect();
        let norm = vec_norm(&v);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::EigenFailure);
        }
        v.iter_mut().for_each(|z| *z /= norm);
        let lambda = s[j];
        let mv = m.mul_vec(&v);
        let residual = vec_norm(
            &mv.iter()
                .zip(&v)
                .map(|(a, b)| *a - lambda * *b)
                .collect::<Vec<_>>(),
        );
        if residual > bound {
            return Err(Error::EigenResidual { residual, bound });
        }
        pairs.push(EigenPair { value: lambda, vector: v });
    }
    Ok(pairs)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.ensure_square()?;
    m.ensure_finite()?;
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let h = m.hermitian_part();
    let evd = h
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let values = (0..n).map(|i| s[i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| evd.U()[(i, j)]);
    Ok((values, vectors))
}

/// Solves A X = B by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square()?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "right-hand side rows",
            expected: n,
            found: b.nrows(),
        });
    }
    let lu = a.as_faer().partial_piv_lu();
    let x = ComplexMatrix::from_faer(lu.solve(b.as_faer()));
    if !x.is_finite() {
        return Err(Error::Inconsistent("linear system is singular".into()));
    }
    Ok(x)
}

/// max Re λ. An empty matrix has abscissa −∞.
pub fn spectral_abscissa(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// max |λ|. An empty matrix has radius 0.
pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
///
/// Columns whose remaining norm falls below `drop_rel` times their original
/// norm are discarded, so the output may have fewer columns than the input.
pub fn orthonormalize(columns: &ComplexMatrix, drop_rel: f64) -> ComplexMatrix {
    let n = columns.nrows();
    let mut basis: Vec<Vec<c64>> = Vec::new();
    for j in 0..columns.ncols() {
        let mut v = columns.column(j);
        let original = vec_norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let proj = vec_dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * *y);
            }
        }
        let norm = vec_norm(&v);
        if norm > drop_rel * original {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    ComplexMatrix::from_columns(n, &basis)
}
