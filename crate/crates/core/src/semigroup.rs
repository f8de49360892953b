//! Evolution, time averages, ergodic projections and invariant states.

use crate::error::{Error, Result};
use crate::lindblad::{Picture, SuperKind, Superoperator};
use crate::numerics::{
    eigenvalues, generalized_eigenspace, matrix_exponential, nullspace, solve, ComplexMatrix,
    Tolerances,
};
use crate::operators::{DensityMatrix, Operator};

/// exp(t·gen) as a channel in the same picture.
pub fn channel(gen: &Superoperator, t: f64) -> Result<Superoperator> {
    gen.require_generator()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("evolution time must be finite and ≥ 0, got {t}")));
    }
    let m = matrix_exponential(gen.matrix(), t)?;
    Superoperator::unchecked(gen.space().clone(), m, gen.picture(), SuperKind::Channel { t })
}

/// Φ_t(X) (Heisenberg generator) or Φ*_t(X) (Schrödinger generator).
pub fn evolve(gen: &Superoperator, x: &Operator, t: f64) -> Result<Operator> {
    if x.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            context: "operand vs generator",
            expected: gen.dim(),
            found: x.dim(),
        });
    }
    let ch = channel(gen, t)?;
    x.with_matrix(ch.apply(x.matrix()))
}

/// (1/T)∫₀ᵀ Φ_s(X) ds by the trapezoidal rule on `steps` uniform intervals.
pub fn cesaro_mean(gen: &Superoperator, x: &Operator, t_total: f64, steps: usize) -> Result<Operator> {
    gen.require_generator()?;
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(Error::invalid("T", "averaging horizon must be finite and > 0"));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", "need at least 2 quadrature intervals"));
    }
    let h = t_total / steps as f64;
    let step = matrix_exponential(gen.matrix(), h)?;
    let mut v = x.matrix().vectorize();
    let mut acc: Vec<_> = v.iter().map(|z| *z * 0.5).collect();
    for k in 1..=steps {
        v = step.mul_vec(&v);
        let w = if k == steps { 0.5 } else { 1.0 };
        acc.iter_mut().zip(&v).for_each(|(a, b)| *a += *b * w);
    }
    let d = gen.dim();
    let mean = ComplexMatrix::unvectorize(&acc, d).scale_real(h / t_total);
    x.with_matrix(mean)
}

/// Spectral projection onto the generalized eigenspace of a generator at 0.
#[derive(Debug, Clone)]
pub struct ErgodicProjection {
    pub matrix: ComplexMatrix,
    pub picture: Picture,
    /// Generalized eigenspace at 0 equals the plain kernel.
    pub semisimple_ok: bool,
    /// Eigenvalues with |Re| and |Im| within the zero band.
    pub zero_multiplicity: usize,
    pub kernel_dim: usize,
    pub idempotency_defect: f64,
}

impl ErgodicProjection {
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = x.nrows();
        ComplexMatrix::unvectorize(&self.matrix.mul_vec(&x.vectorize()), d)
    }

    /// The projection for the dual picture.
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            picture: self.picture.flipped(),
            ..self.clone()
        }
    }
}

/// E = R (L†R)⁻¹ L† with R, L bases of the right and left generalized eigenspaces at 0.
pub fn ergodic_projection(gen: &Superoperator, tol: &Tolerances) -> Result<ErgodicProjection> {
    gen.require_generator()?;
    let m = gen.matrix();
    let n = m.nrows();
    let zero = crate::numerics::cx(0.0, 0.0);
    let zero_multiplicity = eigenvalues(m)?
        .iter()
        .filter(|z| z.re.abs() <= tol.zero_eigenvalue && z.im.abs() <= tol.zero_eigenvalue)
        .count();
    let kernel_dim = nullspace(m, tol)?.ncols();
    let right = generalized_eigenspace(m, zero, n, tol)?;
    let left = generalized_eigenspace(&m.adjoint(), zero, n, tol)?;
    if right.ncols() == 0 {
        return Err(Error::EmptyKernel);
    }
    if right.ncols() != left.ncols() {
        return Err(Error::Inconsistent(format!(
            "left/right generalized eigenspaces at 0 differ in dimension ({} vs {})",
            left.ncols(),
            right.ncols()
        )));
    }
    let gram = left.adjoint().matmul(&right);
    let coupling = solve(&gram, &left.adjoint())?;
    let e = right.matmul(&coupling);
    let idempotency_defect = (&e.matmul(&e) - &e).norm_max();
    if idempotency_defect > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "ergodic projection not idempotent (defect {idempotency_defect:.3e})"
        )));
    }
    Ok(ErgodicProjection {
        matrix: e,
        picture: gen.picture(),
        semisimple_ok: kernel_dim == right.ncols(),
        zero_multiplicity,
        kernel_dim,
        idempotency_defect,
    })
}

#[derive(Debug, Clone)]
pub struct InvariantStateSet {
    /// Hermitian basis of ker(L*), orthonormal in the Hilbert–Schmidt pairing.
    pub kernel_basis: Vec<ComplexMatrix>,
    /// E*(I/d), clipped to a state.
    pub canonical_state: DensityMatrix,
    pub extremal_states: Option<Vec<DensityMatrix>>,
    pub projection: ErgodicProjection,
}

impl InvariantStateSet {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }
}

/// Kernel and canonical invariant state of a Schrödinger generator.
pub fn invariant_states(gen: &Superoperator, tol: &Tolerances) -> Result<InvariantStateSet> {
    gen.require_generator()?;
    gen.require_picture(Picture::Schrodinger)?;
    let d = gen.dim();
    let kernel = nullspace(gen.matrix(), tol)?;
    if kernel.ncols() == 0 {
        return Err(Error::EmptyKernel);
    }
    let raw: Vec<ComplexMatrix> = (0..kernel.ncols())
        .map(|j| ComplexMatrix::unvectorize(&kernel.column(j), d))
        .collect();
    let kernel_basis = hermitian_basis(&raw, kernel.ncols())?;
    let projection = ergodic_projection(gen, tol)?;
    let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    let canonical_state = DensityMatrix::from_clipped(gen.space().clone(), &projection.apply(&mixed))?;
    Ok(InvariantStateSet {
        kernel_basis,
        canonical_state,
        extremal_states: None,
        projection,
    })
}

/// Real Gram–Schmidt over the Hermitian and anti-Hermitian parts of a †-closed span.
pub(crate) fn hermitian_basis(raw: &[ComplexMatrix], expected: usize) -> Result<Vec<ComplexMatrix>> {
    if expected == 0 {
        return Ok(Vec::new());
    }
    let i = crate::numerics::cx(0.0, 1.0);
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for x in raw {
        let xd = x.adjoint();
        // Both parts are measured against ‖x‖ so round-off in an already Hermitian x is dropped.
        let reference = x.norm_fro();
        for cand in [x + &xd, (x - &xd).scale(i)] {
            if cand.norm_fro() <= 1e-6 * reference {
                continue;
            }
            let mut v = cand;
            for _ in 0..2 {
                for q in &out {
                    let c = hs_real(q, &v);
                    v -= &q.scale_real(c);
                }
            }
            let norm = v.norm_fro();
            if norm > 1e-6 * reference {
                out.push(v.scale_real(1.0 / norm).hermitian_part());
            }
            if out.len() == expected {
                return Ok(out);
            }
        }
    }
    Err(Error::Inconsistent(format!(
        "kernel is not closed under adjoint: found {} Hermitian directions, expected {expected}",
        out.len()
    )))
}

/// Re tr(A† B)
fn hs_real(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.entries().zip(b.entries()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_schrodinger_generator, GKLSSpec};
    use crate::numerics::cx;
    use crate::operators::{fock_operators, HilbertSpace};

    fn damping(gamma: f64) -> Superoperator {
        let (a, _, _) = fock_operators(2).unwrap();
        let l = a.with_matrix(a.matrix().scale_real(gamma.sqrt())).unwrap();
        build_schrodinger_generator(&GKLSSpec::new(Operator::zero(a.space()), vec![l]).unwrap()).unwrap()
    }

    fn zero_gen(d: usize) -> Superoperator {
        let s = HilbertSpace::abstract_space(d).unwrap();
        build_schrodinger_generator(&GKLSSpec::new(Operator::zero(&s), vec![]).unwrap()).unwrap()
    }

    #[test]
    fn evolve_zero_time_and_unitality() {
        let gen = damping(1.3);
        let x = Operator::new(
            gen.space().clone(),
            ComplexMatrix::from_fn(2, 2, |i, j| cx(i as f64, j as f64)),
        )
        .unwrap();
        assert_eq!(evolve(&gen, &x, 0.0).unwrap(), x);
        let heis = gen.adjoint();
        let id = Operator::identity(gen.space());
        for t in [0.3, 4.0] {
            let y = evolve(&heis, &id, t).unwrap();
            assert!((y.matrix() - id.matrix()).norm_max() < 1e-13);
        }
        assert!(evolve(&gen, &x, -1.0).is_err());
    }

    #[test]
    fn excited_population_decays_exponentially() {
        let gamma = 0.8;
        let gen = damping(gamma);
        let rho = DensityMatrix::basis_state(gen.space(), 1).unwrap().as_operator();
        for t in [0.1, 1.0, 3.0] {
            let p = evolve(&gen, &rho, t).unwrap().matrix()[(1, 1)].re;
            assert!((p - (-gamma * t).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn cesaro_of_zero_generator_is_identity_map() {
        let gen = zero_gen(2);
        let x = Operator::new(gen.space().clone(), ComplexMatrix::unit(2, 0, 1)).unwrap();
        let m = cesaro_mean(&gen, &x, 5.0, 10).unwrap();
        assert!((m.matrix() - x.matrix()).norm_max() < 1e-15);
    }

    #[test]
    fn cesaro_kills_oscillating_coherence() {
        let s = HilbertSpace::abstract_space(2).unwrap();
        let h = Operator::new(s, ComplexMatrix::from_real_diag(&[0.0, 1.0])).unwrap();
        let gen = build_schrodinger_generator(&GKLSSpec::new(h, vec![]).unwrap()).unwrap();
        let x = Operator::new(gen.space().clone(), ComplexMatrix::unit(2, 0, 1)).unwrap();
        let m = cesaro_mean(&gen, &x, 200.0, 20000).unwrap();
        // |(1/T)∫ e^{is} ds| ≤ 2/T
        assert!(m.matrix().norm_max() <= 2.0 / 200.0 + 1e-6);
    }

    #[test]
    fn ergodic_projection_examples() {
        let e = ergodic_projection(&zero_gen(2), &Tolerances::default()).unwrap();
        assert!((&e.matrix - &ComplexMatrix::identity(4)).norm_max() < 1e-12);

        let gen = damping(1.0);
        let e = ergodic_projection(&gen, &Tolerances::default()).unwrap();
        assert!(e.semisimple_ok);
        assert_eq!(e.zero_multiplicity, 1);
        // Every state is sent to |e0⟩⟨e0|.
        let rho = ComplexMatrix::from_real_diag(&[0.25, 0.75]);
        let p = e.apply(&rho);
        assert!((&p - &ComplexMatrix::unit(2, 0, 0)).norm_max() < 1e-12);
        for t in [0.5, 2.0] {
            let ch = channel(&gen, t).unwrap();
            let prod = e.matrix.matmul(ch.matrix());
            assert!((&prod - &e.matrix).norm_max() < 1e-10);
        }
    }

    #[test]
    fn invariant_states_examples() {
        let tol = Tolerances::default();
        let inv = invariant_states(&damping(1.0), &tol).unwrap();
        assert_eq!(inv.kernel_dim(), 1);
        assert!((inv.canonical_state.matrix() - &ComplexMatrix::unit(2, 0, 0)).norm_max() < 1e-12);

        let inv = invariant_states(&zero_gen(2), &tol).unwrap();
        assert_eq!(inv.kernel_dim(), 4);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!((inv.canonical_state.matrix() - &half).norm_max() < 1e-12);
        for b in &inv.kernel_basis {
            assert!(b.hermitian_defect() < 1e-14);
        }
        assert!(invariant_states(&damping(1.0).adjoint(), &tol).is_err());
    }

    #[test]
    fn hermitian_basis_ignores_round_off_anti_hermitian_parts() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let mut b = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        b[(0, 1)] = cx(0.0, 1e-15);
        let basis = hermitian_basis(&[a, b], 2).unwrap();
        let comm = &basis[0].matmul(&basis[1]) - &basis[1].matmul(&basis[0]);
        assert!(comm.norm_fro() < 1e-12);
    }
}
