//! Truncated Fock operators, density matrices and subspaces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{c64, cx, hermitian_eigen, range_basis, ComplexMatrix, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    TruncatedFock,
    Abstract,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HilbertSpace {
    pub dim: usize,
    pub kind: SpaceKind,
    pub truncation_note: Option<String>,
}

impl HilbertSpace {
    pub fn new(dim: usize, kind: SpaceKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "Hilbert space dimension must be at least 1"));
        }
        Ok(Self {
            dim,
            kind,
            truncation_note: None,
        })
    }

    pub fn abstract_space(dim: usize) -> Result<Self> {
        Self::new(dim, SpaceKind::Abstract)
    }

    pub fn fock(dim: usize) -> Result<Self> {
        let mut s = Self::new(dim, SpaceKind::TruncatedFock)?;
        s.truncation_note = Some(format!("Fock levels 0..{}", dim - 1));
        Ok(s)
    }

    pub(crate) fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "ambient Hilbert spaces differ",
                expected: self.dim,
                found: other.dim,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: ComplexMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.ensure_square()?;
        if n != space.dim {
            return Err(Error::DimensionMismatch {
                context: "operator matrix vs space",
                expected: space.dim,
                found: n,
            });
        }
        matrix.ensure_finite()?;
        Ok(Self { space, matrix })
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(space.dim, space.dim),
            space: space.clone(),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        Self {
            matrix: ComplexMatrix::identity(space.dim),
            space: space.clone(),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn with_matrix(&self, matrix: ComplexMatrix) -> Result<Self> {
        Self::new(self.space.clone(), matrix)
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: ComplexMatrix,
    leakage: f64,
}

impl DensityMatrix {
    /// Validates a candidate state: Hermitian within 1e-10, spectrum ≥ −psd_floor,
    /// trace within 1e-9 of 1. The stored matrix is the Hermitian part.
    pub fn new(space: HilbertSpace, matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let deviation = op.matrix.hermitian_defect();
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        let h = op.matrix.hermitian_part();
        let (vals, _) = hermitian_eigen(&h)?;
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -tol.psd_floor {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let trace = h.trace().re;
        if (trace - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { trace });
        }
        Ok(Self {
            space: op.space,
            matrix: h,
            leakage: 0.0,
        })
    }

    /// Projects a Hermitian matrix onto the states: negative eigenvalues are clipped
    /// and the trace is renormalized. The clipped mass plus any trace defect is
    /// recorded as leakage.
    pub fn from_clipped(space: HilbertSpace, matrix: &ComplexMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix.clone())?;
        let (vals, vecs) = hermitian_eigen(&op.matrix)?;
        let clipped: f64 = vals.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
        let kept: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let mass: f64 = kept.iter().sum();
        if mass <= 0.0 {
            return Err(Error::NotPositive {
                min_eigenvalue: vals.first().copied().unwrap_or(0.0),
            });
        }
        let scaled: Vec<f64> = kept.iter().map(|v| v / mass).collect();
        let m = vecs
            .matmul(&ComplexMatrix::from_real_diag(&scaled))
            .matmul(&vecs.adjoint())
            .hermitian_part();
        let raw_trace = op.matrix.trace().re;
        Ok(Self {
            space: op.space,
            matrix: m,
            leakage: clipped + (1.0 - raw_trace).abs(),
        })
    }

    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let d = space.dim;
        Self {
            space: space.clone(),
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            leakage: 0.0,
        }
    }

    /// |ψ⟩⟨ψ| for a nonzero vector, normalized.
    pub fn pure(space: &HilbertSpace, psi: &[c64]) -> Result<Self> {
        if psi.len() != space.dim {
            return Err(Error::DimensionMismatch {
                context: "state vector length",
                expected: space.dim,
                found: psi.len(),
            });
        }
        let norm = crate::numerics::vec_norm(psi);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("psi", "state vector must be nonzero and finite"));
        }
        let v: Vec<c64> = psi.iter().map(|z| *z / norm).collect();
        Ok(Self {
            space: space.clone(),
            matrix: ComplexMatrix::outer(&v, &v),
            leakage: 0.0,
        })
    }

    pub fn basis_state(space: &HilbertSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::invalid("n", format!("level {n} outside dimension {}", space.dim)));
        }
        let mut v = vec![cx(0.0, 0.0); space.dim];
        v[n] = cx(1.0, 0.0);
        Self::pure(space, &v)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn with_leakage(mut self, leakage: f64) -> Self {
        self.leakage = leakage;
        self
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.clone(),
        }
    }
}

/// Subspace stored as orthonormal columns together with its projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    space: HilbertSpace,
    basis: ComplexMatrix,
    projector: ComplexMatrix,
}

impl Subspace {
    /// From columns that are already orthonormal (checked to 1e-10).
    pub fn from_orthonormal(space: &HilbertSpace, basis: ComplexMatrix) -> Result<Self> {
        if basis.nrows() != space.dim {
            return Err(Error::DimensionMismatch {
                context: "subspace basis rows",
                expected: space.dim,
                found: basis.nrows(),
            });
        }
        basis.ensure_finite()?;
        let k = basis.ncols();
        if k > 0 {
            let gram = basis.adjoint().matmul(&basis);
            let defect = (&gram - &ComplexMatrix::identity(k)).norm_max();
            if defect > 1e-10 {
                return Err(Error::Inconsistent(format!(
                    "subspace basis is not orthonormal (defect {defect:.3e})"
                )));
            }
        }
        let projector = if k == 0 {
            ComplexMatrix::zeros(space.dim, space.dim)
        } else {
            basis.matmul(&basis.adjoint())
        };
        Ok(Self {
            space: space.clone(),
            basis,
            projector,
        })
    }

    /// Span of arbitrary columns, rank decided relative to the largest singular value.
    pub fn span(space: &HilbertSpace, columns: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if columns.nrows() != space.dim {
            return Err(Error::DimensionMismatch {
                context: "spanning vectors length",
                expected: space.dim,
                found: columns.nrows(),
            });
        }
        let q = range_basis(columns, tol.nullspace_rel)?;
        Self::from_orthonormal(space, q)
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        Self {
            space: space.clone(),
            basis: ComplexMatrix::zeros(space.dim, 0),
            projector: ComplexMatrix::zeros(space.dim, space.dim),
        }
    }

    pub fn full(space: &HilbertSpace) -> Self {
        Self {
            space: space.clone(),
            basis: ComplexMatrix::identity(space.dim),
            projector: ComplexMatrix::identity(space.dim),
        }
    }

    /// Span of the coordinate vectors e_i, i ∈ `indices`.
    pub fn coordinate(space: &HilbertSpace, indices: &[usize]) -> Result<Self> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&i| i >= space.dim) {
            return Err(Error::invalid("indices", format!("index {bad} outside dimension {}", space.dim)));
        }
        let basis = ComplexMatrix::from_fn(space.dim, sorted.len(), |i, j| {
            if i == sorted[j] {
                cx(1.0, 0.0)
            } else {
                cx(0.0, 0.0)
            }
        });
        Self::from_orthonormal(space, basis)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.dim
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.space.dim
    }

    /// I − P
    pub fn complement_projector(&self) -> ComplexMatrix {
        &ComplexMatrix::identity(self.space.dim) - &self.projector
    }

    pub fn complement(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(Self::full(&self.space));
        }
        if self.is_full() {
            return Ok(Self::zero(&self.space));
        }
        // Eigenvectors of P with eigenvalue ≈ 0, taken from the Hermitian eigensolver.
        let (vals, vecs) = hermitian_eigen(&self.projector)?;
        let k = self.space.dim - self.dim();
        let cols: Vec<usize> = (0..k).collect();
        debug_assert!(vals[k - 1] < 0.5);
        let rows: Vec<usize> = (0..self.space.dim).collect();
        Self::from_orthonormal(&self.space, vecs.select(&rows, &cols))
    }

    /// Support of P_V + P_W.
    pub fn sum(&self, other: &Subspace, tol: &Tolerances) -> Result<Self> {
        self.space.check_same(&other.space)?;
        support_of_psd(&self.space, &(&self.projector + &other.projector), tol)
    }

    /// Intersection as the complement of the sum of complements.
    pub fn intersection(&self, other: &Subspace, tol: &Tolerances) -> Result<Self> {
        self.complement()?.sum(&other.complement()?, tol)?.complement()
    }

    /// True iff W ⊆ V, judged by ‖(I − P_V) P_W‖ ≤ 1e-8.
    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        self.space.check_same(&other.space)?;
        if other.is_zero() {
            return Ok(true);
        }
        let r = self.complement_projector().matmul(&other.basis);
        Ok(r.norm_spectral() <= 1e-8)
    }

    /// Largest principal angle between two subspaces; π/2 when their dimensions differ.
    pub fn max_principal_angle(&self, other: &Subspace) -> Result<f64> {
        self.space.check_same(&other.space)?;
        if self.dim() != other.dim() {
            return Ok(std::f64::consts::FRAC_PI_2);
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let s = self.complement_projector().matmul(&other.basis).norm_spectral();
        Ok(s.clamp(0.0, 1.0).asin())
    }

    /// Q† A Q
    pub fn compress(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint().matmul(a).matmul(&self.basis)
    }

    /// Q B Q†
    pub fn lift(&self, b: &ComplexMatrix) -> ComplexMatrix {
        self.basis.matmul(b).matmul(&self.basis.adjoint())
    }

    /// Indices `i` with e_i in the subspace, if the subspace is exactly a coordinate span.
    pub fn coordinate_indices(&self) -> Option<Vec<usize>> {
        let d = self.space.dim;
        let idx: Vec<usize> = (0..d).filter(|&i| self.projector[(i, i)].re > 0.5).collect();
        let candidate = Self::coordinate(&self.space, &idx).ok()?;
        ((&candidate.projector - &self.projector).norm_max() <= 1e-8).then_some(idx)
    }

    /// Max of ‖P² − P‖ and ‖P − P†‖.
    pub fn projector_defect(&self) -> f64 {
        let p2 = self.projector.matmul(&self.projector);
        (&p2 - &self.projector)
            .norm_max()
            .max(self.projector.hermitian_defect())
    }
}

/// Span of eigenvectors of a PSD matrix with eigenvalue above `nullspace_rel · λ_max`.
fn support_of_psd(space: &HilbertSpace, a: &ComplexMatrix, tol: &Tolerances) -> Result<Subspace> {
    let (vals, vecs) = hermitian_eigen(a)?;
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Ok(Subspace::zero(space));
    }
    let cut = tol.nullspace_rel * lmax;
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > cut).collect();
    let rows: Vec<usize> = (0..space.dim).collect();
    Subspace::from_orthonormal(space, vecs.select(&rows, &cols))
}

/// Support of a positive semidefinite operator.
pub fn support_projection(a: &Operator, tol: &Tolerances) -> Result<Subspace> {
    let deviation = a.matrix.hermitian_defect();
    let scale = a.matrix.norm_max().max(1.0);
    if deviation > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let (vals, _) = hermitian_eigen(&a.matrix)?;
    let lmin = vals.first().copied().unwrap_or(0.0);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmin < -tol.psd_floor.max(tol.nullspace_rel * lmax) {
        return Err(Error::NotPositive {
            min_eigenvalue: lmin,
        });
    }
    support_of_psd(&a.space, &a.matrix, tol)
}

/// Annihilation, creation and number operators on Fock levels 0..d−1.
pub fn fock_operators(d: usize) -> Result<(Operator, Operator, Operator)> {
    if d < 2 {
        return Err(Error::invalid("d", "Fock truncation needs at least 2 levels"));
    }
    let space = HilbertSpace::fock(d)?;
    let a = ComplexMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            cx((j as f64).sqrt(), 0.0)
        } else {
            cx(0.0, 0.0)
        }
    });
    let n: Vec<f64> = (0..d).map(|k| k as f64).collect();
    let a_dag = a.adjoint();
    Ok((
        Operator::new(space.clone(), a)?,
        Operator::new(space.clone(), a_dag)?,
        Operator::new(space, ComplexMatrix::from_real_diag(&n))?,
    ))
}

/// Trace norm of a Hermitian matrix, from its eigenvalues.
pub fn trace_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(a)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(a)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(a)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn fock_small_cases() {
        let (a, _, _) = fock_operators(2).unwrap();
        assert_eq!(a.matrix()[(0, 1)], cx(1.0, 0.0));
        assert_eq!(a.matrix().norm_fro(), 1.0);
        let (_, _, n) = fock_operators(4).unwrap();
        assert_eq!(n.matrix().diagonal(), [0., 1., 2., 3.].map(|x| cx(x, 0.0)));
        assert!(fock_operators(1).is_err());
    }

    #[test]
    fn truncated_commutator_at_five_levels() {
        let (a, ad, _) = fock_operators(5).unwrap();
        let comm = &a.matrix().matmul(ad.matrix()) - &ad.matrix().matmul(a.matrix());
        let mut want = ComplexMatrix::identity(5);
        want[(4, 4)] = cx(1.0 - 5.0, 0.0);
        assert!((&comm - &want).norm_max() < 1e-14);
    }

    #[test]
    fn support_projection_examples() {
        let s = HilbertSpace::abstract_space(3).unwrap();
        let id = Operator::identity(&s);
        assert!(support_projection(&id, &tol()).unwrap().is_full());
        let e0 = Operator::new(s.clone(), ComplexMatrix::unit(3, 0, 0)).unwrap();
        assert_eq!(support_projection(&e0, &tol()).unwrap().coordinate_indices(), Some(vec![0]));
        let m = ComplexMatrix::from_real_diag(&[0.5, 1e-15, 0.0]);
        let sup = support_projection(&Operator::new(s.clone(), m).unwrap(), &tol()).unwrap();
        assert_eq!(sup.coordinate_indices(), Some(vec![0]));
        assert!(support_projection(&Operator::zero(&s), &tol()).unwrap().is_zero());
    }

    #[test]
    fn subspace_algebra_examples() {
        let s = HilbertSpace::abstract_space(3).unwrap();
        let e0 = Subspace::coordinate(&s, &[0]).unwrap();
        let e01 = Subspace::coordinate(&s, &[0, 1]).unwrap();
        assert_eq!(e0.complement().unwrap().coordinate_indices(), Some(vec![1, 2]));
        assert_eq!(e0.sum(&e01, &tol()).unwrap().coordinate_indices(), Some(vec![0, 1]));
        assert!(Subspace::full(&s).contains(&e01).unwrap());
        assert!(e01.contains(&e0).unwrap());
        assert!(!e0.contains(&e01).unwrap());
        let e12 = Subspace::coordinate(&s, &[1, 2]).unwrap();
        assert_eq!(e01.intersection(&e12, &tol()).unwrap().coordinate_indices(), Some(vec![1]));
    }

    #[test]
    fn density_matrix_validation() {
        let s = HilbertSpace::abstract_space(2).unwrap();
        assert!(DensityMatrix::new(s.clone(), ComplexMatrix::identity(2), &tol()).is_err());
        let bad = ComplexMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(s.clone(), bad.clone(), &tol()),
            Err(Error::NotPositive { .. })
        ));
        let clipped = DensityMatrix::from_clipped(s, &bad).unwrap();
        assert!((clipped.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((clipped.leakage() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        let s = HilbertSpace::abstract_space(2).unwrap();
        let th = 0.3_f64;
        let a = Subspace::coordinate(&s, &[0]).unwrap();
        let b = Subspace::span(
            &s,
            &ComplexMatrix::from_columns(2, &[vec![cx(th.cos(), 0.0), cx(th.sin(), 0.0)]]),
            &tol(),
        )
        .unwrap();
        assert!((a.max_principal_angle(&b).unwrap() - th).abs() < 1e-12);
    }
}
