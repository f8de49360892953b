//! Generators in GKLS form and their vectorized superoperators.
//!
//! Vectorization stacks columns: `vec(X)[i + j·d] = X[i, j]`, so the map
//! `X ↦ A X B` becomes the matrix `Bᵀ ⊗ A`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{c64, cx, hermitian_eigen, ComplexMatrix, Tolerances};
use crate::operators::{HilbertSpace, Operator};

/// Hamiltonian plus a finite list of jump operators.
#[derive(Debug, Clone)]
pub struct GKLSSpec {
    hamiltonian: Operator,
    jumps: Vec<Operator>,
}

impl GKLSSpec {
    pub fn new(hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        let d = hamiltonian.dim();
        let deviation = hamiltonian.matrix().hermitian_defect();
        if deviation > 1e-10 * hamiltonian.matrix().norm_max().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        for l in &jumps {
            if l.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "jump operator vs Hamiltonian",
                    expected: d,
                    found: l.dim(),
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn space(&self) -> &HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    /// Σ L†L
    pub fn dissipation(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut k = ComplexMatrix::zeros(d, d);
        for l in &self.jumps {
            k += &l.matrix().adjoint().matmul(l.matrix());
        }
        k
    }

    /// G = −iH − ½ΣL†L
    pub fn effective_g(&self) -> ComplexMatrix {
        let mut g = self.hamiltonian.matrix().scale(cx(0.0, -1.0));
        g -= &self.dissipation().scale_real(0.5);
        g
    }

    pub fn to_pair(&self) -> GeneratorPair {
        GeneratorPair {
            g: Operator::new(self.space().clone(), self.effective_g()).expect("shape preserved"),
            jumps: self.jumps.clone(),
        }
    }
}

/// A basis vector at which the dissipativity inequality fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipativityViolation {
    pub basis_index: usize,
    pub value: f64,
}

/// Generator given through G and the jump operators.
#[derive(Debug, Clone)]
pub struct GeneratorPair {
    pub g: Operator,
    pub jumps: Vec<Operator>,
}

impl GeneratorPair {
    pub fn new(g: Operator, jumps: Vec<Operator>) -> Result<Self> {
        for l in &jumps {
            if l.dim() != g.dim() {
                return Err(Error::DimensionMismatch {
                    context: "jump operator vs G",
                    expected: g.dim(),
                    found: l.dim(),
                });
            }
        }
        Ok(Self { g, jumps })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Basis vectors e_k with Re⟨e_k, G e_k⟩ + ½Σ‖L e_k‖² > 1e-9, worst first.
    pub fn dissipativity_violations(&self) -> Vec<DissipativityViolation> {
        let d = self.dim();
        let mut out: Vec<DissipativityViolation> = (0..d)
            .map(|k| {
                let mut v = self.g.matrix()[(k, k)].re;
                for l in &self.jumps {
                    v += 0.5 * (0..d).map(|i| l.matrix()[(i, k)].norm_sqr()).sum::<f64>();
                }
                DissipativityViolation {
                    basis_index: k,
                    value: v,
                }
            })
            .filter(|v| v.value > 1e-9)
            .collect();
        out.sort_by(|a, b| b.value.total_cmp(&a.value));
        out
    }

    /// max |G + G† + ΣL†L|
    pub fn markov_defect(&self) -> f64 {
        let mut s = self.g.matrix() + &self.g.matrix().adjoint();
        for l in &self.jumps {
            s += &l.matrix().adjoint().matmul(l.matrix());
        }
        s.norm_max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

impl Picture {
    pub fn flipped(self) -> Self {
        match self {
            Picture::Heisenberg => Picture::Schrodinger,
            Picture::Schrodinger => Picture::Heisenberg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum SuperKind {
    Generator,
    Channel { t: f64 },
}

/// Linear map on d×d operators as a d²×d² matrix.
#[derive(Debug, Clone)]
pub struct Superoperator {
    space: HilbertSpace,
    matrix: ComplexMatrix,
    picture: Picture,
    kind: SuperKind,
}

impl Superoperator {
    /// Checked constructor: generators must annihilate the trace (Schrödinger) or the
    /// identity (Heisenberg); channels must preserve it, all within 1e-9 relative.
    pub fn new(
        space: HilbertSpace,
        matrix: ComplexMatrix,
        picture: Picture,
        kind: SuperKind,
    ) -> Result<Self> {
        let s = Self::unchecked(space, matrix, picture, kind)?;
        let defect = s.conservation_defect();
        let scale = s.matrix.norm_max().max(1.0);
        if defect > 1e-9 * scale {
            return Err(Error::Inconsistent(format!(
                "superoperator fails trace/unit conservation (defect {defect:.3e})"
            )));
        }
        Ok(s)
    }

    pub(crate) fn unchecked(
        space: HilbertSpace,
        matrix: ComplexMatrix,
        picture: Picture,
        kind: SuperKind,
    ) -> Result<Self> {
        let n = matrix.ensure_square()?;
        if n != space.dim * space.dim {
            return Err(Error::DimensionMismatch {
                context: "superoperator size vs d^2",
                expected: space.dim * space.dim,
                found: n,
            });
        }
        matrix.ensure_finite()?;
        Ok(Self {
            space,
            matrix,
            picture,
            kind,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn kind(&self) -> SuperKind {
        self.kind
    }

    pub fn is_generator(&self) -> bool {
        self.kind == SuperKind::Generator
    }

    pub fn require_generator(&self) -> Result<()> {
        if self.is_generator() {
            Ok(())
        } else {
            Err(Error::WrongKind("expected a generator, got a channel"))
        }
    }

    pub fn require_picture(&self, picture: Picture) -> Result<()> {
        if self.picture == picture {
            Ok(())
        } else if picture == Picture::Schrodinger {
            Err(Error::WrongKind("expected a Schrödinger-picture superoperator"))
        } else {
            Err(Error::WrongKind("expected a Heisenberg-picture superoperator"))
        }
    }

    /// Applies the map to a d×d matrix.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        assert_eq!((x.nrows(), x.ncols()), (d, d), "operand is not d x d");
        ComplexMatrix::unvectorize(&self.matrix.mul_vec(&x.vectorize()), d)
    }

    /// Trace-pairing adjoint; the picture flips, the kind is kept.
    pub fn adjoint(&self) -> Superoperator {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            picture: self.picture.flipped(),
            kind: self.kind,
        }
    }

    /// Same map in the requested picture.
    pub fn in_picture(&self, picture: Picture) -> Superoperator {
        if self.picture == picture {
            self.clone()
        } else {
            self.adjoint()
        }
    }

    /// Deviation from trace annihilation/preservation (Schrödinger) or from
    /// annihilating/fixing the identity (Heisenberg).
    pub fn conservation_defect(&self) -> f64 {
        let d = self.dim();
        let target = match self.kind {
            SuperKind::Generator => 0.0,
            SuperKind::Channel { .. } => 1.0,
        };
        let id = vec_identity(d);
        match self.picture {
            Picture::Schrodinger => {
                // Row functional vec(I)† M against vec(I)†.
                let mut worst = 0.0_f64;
                for col in 0..d * d {
                    let s: c64 = (0..d).map(|i| self.matrix[(i + i * d, col)]).sum();
                    let want = if col % (d + 1) == 0 { target } else { 0.0 };
                    worst = worst.max((s - cx(want, 0.0)).norm());
                }
                worst
            }
            Picture::Heisenberg => {
                let v = self.matrix.mul_vec(&id);
                v.iter()
                    .zip(&id)
                    .map(|(a, b)| (*a - *b * target).norm())
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// vec(I_d)
pub fn vec_identity(d: usize) -> Vec<c64> {
    ComplexMatrix::identity(d).vectorize()
}

/// ρ ↦ −i[H, ρ] + Σ (LρL† − ½{L†L, ρ})
pub fn build_schrodinger_generator(spec: &GKLSSpec) -> Result<Superoperator> {
    let d = spec.dim();
    let id = ComplexMatrix::identity(d);
    let h = spec.hamiltonian().matrix();
    let mut m = (&id.kron(h) - &h.transpose().kron(&id)).scale(cx(0.0, -1.0));
    for l in spec.jumps() {
        let lm = l.matrix();
        let k = lm.adjoint().matmul(lm);
        m += &lm.conj().kron(lm);
        m -= &id.kron(&k).scale_real(0.5);
        m -= &k.transpose().kron(&id).scale_real(0.5);
    }
    Superoperator::new(spec.space().clone(), m, Picture::Schrodinger, SuperKind::Generator)
}

/// A ↦ AG + G†A + Σ L†AL (Heisenberg picture).
///
/// Unitality is not enforced here since the pair need not satisfy the Markov
/// identity; see [`GeneratorPair::markov_defect`].
pub fn build_from_generator_pair(pair: &GeneratorPair) -> Result<Superoperator> {
    let d = pair.dim();
    let id = ComplexMatrix::identity(d);
    let g = pair.g.matrix();
    let mut m = g.transpose().kron(&id);
    m += &id.kron(&g.adjoint());
    for l in &pair.jumps {
        m += &l.matrix().transpose().kron(&l.matrix().adjoint());
    }
    Superoperator::unchecked(pair.g.space().clone(), m, Picture::Heisenberg, SuperKind::Generator)
}

pub fn adjoint(s: &Superoperator) -> Superoperator {
    s.adjoint()
}

/// Choi matrix Σ E_ij ⊗ Φ(E_ij) of a Schrödinger-picture map.
pub fn choi_matrix(s: &Superoperator) -> ComplexMatrix {
    let schr = s.in_picture(Picture::Schrodinger);
    let d = s.dim();
    let m = schr.matrix();
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, k) = (r / d, r % d);
        let (j, l) = (c / d, c % d);
        m[(k + l * d, i + j * d)]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpReport {
    pub trace_dev: f64,
    pub choi_min_eig: f64,
    pub pass: bool,
}

/// Trace preservation and Choi positivity of a channel.
pub fn verify_cptp(s: &Superoperator, tol: &Tolerances) -> Result<CptpReport> {
    if s.is_generator() {
        return Err(Error::WrongKind("CPTP verification needs a channel, got a generator"));
    }
    let schr = s.in_picture(Picture::Schrodinger);
    let trace_dev = schr.conservation_defect();
    let (vals, _) = hermitian_eigen(&choi_matrix(&schr))?;
    let choi_min_eig = vals.first().copied().unwrap_or(0.0);
    Ok(CptpReport {
        trace_dev,
        choi_min_eig,
        pass: trace_dev <= 1e-8 && choi_min_eig >= -tol.psd_floor,
    })
}

/// W† M W with W = conj(Q) ⊗ Q: the map Y ↦ Q†·M(Q Y Q†)·Q on k×k operators.
pub fn compress_superoperator(m: &ComplexMatrix, basis: &ComplexMatrix) -> ComplexMatrix {
    let w = basis.conj().kron(basis);
    w.adjoint().matmul(m).matmul(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::fock_operators;

    fn amplitude_damping(gamma: f64) -> GKLSSpec {
        let (a, _, _) = fock_operators(2).unwrap();
        let l = a.with_matrix(a.matrix().scale_real(gamma.sqrt())).unwrap();
        GKLSSpec::new(Operator::zero(a.space()), vec![l]).unwrap()
    }

    // Element-wise oracle: the defining formula applied to one operator.
    fn lindblad_formula(spec: &GKLSSpec, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = spec.hamiltonian().matrix();
        let mut out = (&h.matmul(rho) - &rho.matmul(h)).scale(cx(0.0, -1.0));
        for l in spec.jumps() {
            let l = l.matrix();
            let k = l.adjoint().matmul(l);
            out += &l.matmul(rho).matmul(&l.adjoint());
            out -= &(&k.matmul(rho) + &rho.matmul(&k)).scale_real(0.5);
        }
        out
    }

    #[test]
    fn empty_spec_gives_zero_generator() {
        let s = HilbertSpace::abstract_space(3).unwrap();
        let spec = GKLSSpec::new(Operator::zero(&s), vec![]).unwrap();
        assert_eq!(build_schrodinger_generator(&spec).unwrap().matrix().norm_max(), 0.0);
    }

    #[test]
    fn amplitude_damping_matches_formula_on_units() {
        let spec = amplitude_damping(0.7);
        let gen = build_schrodinger_generator(&spec).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = ComplexMatrix::unit(2, i, j);
                let diff = &gen.apply(&e) - &lindblad_formula(&spec, &e);
                assert!(diff.norm_max() < 1e-15, "unit ({i},{j})");
            }
        }
    }

    #[test]
    fn commutator_spectrum() {
        let s = HilbertSpace::abstract_space(2).unwrap();
        let h = Operator::new(s, ComplexMatrix::from_real_diag(&[1.0, -1.0])).unwrap();
        let gen = build_schrodinger_generator(&GKLSSpec::new(h, vec![]).unwrap()).unwrap();
        let mut ev = crate::numerics::eigenvalues(gen.matrix()).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        let want = [cx(0., -2.), cx(0., 0.), cx(0., 0.), cx(0., 2.)];
        for (a, b) in ev.iter().zip(want) {
            assert!((*a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pair_form_is_adjoint_of_schrodinger_form() {
        let (a, ad, n) = fock_operators(3).unwrap();
        let h = n.with_matrix(n.matrix().scale_real(0.3)).unwrap();
        let spec = GKLSSpec::new(h, vec![a.clone(), ad.with_matrix(ad.matrix().scale_real(0.5)).unwrap()])
            .unwrap();
        let schr = build_schrodinger_generator(&spec).unwrap();
        let heis = build_from_generator_pair(&spec.to_pair()).unwrap();
        assert!((heis.matrix() - schr.adjoint().matrix()).norm_max() < 1e-10);
        assert!(spec.to_pair().markov_defect() < 1e-12);
        assert!(heis.conservation_defect() < 1e-9);
        assert!(spec.to_pair().dissipativity_violations().is_empty());
    }

    #[test]
    fn adjoint_is_involution() {
        let gen = build_schrodinger_generator(&amplitude_damping(1.0)).unwrap();
        let back = gen.adjoint().adjoint();
        assert_eq!(back.matrix(), gen.matrix());
        assert_eq!(back.picture(), Picture::Schrodinger);
        assert!(gen.adjoint().conservation_defect() < 1e-12);
    }

    #[test]
    fn cptp_examples() {
        let s = HilbertSpace::abstract_space(2).unwrap();
        let id = Superoperator::new(
            s.clone(),
            ComplexMatrix::identity(4),
            Picture::Schrodinger,
            SuperKind::Channel { t: 0.0 },
        )
        .unwrap();
        let r = verify_cptp(&id, &Tolerances::default()).unwrap();
        assert!(r.pass);
        assert!(r.choi_min_eig.abs() < 1e-14);

        // Transpose map: vec(Xᵀ)[i + j d] = X[j, i].
        let t = ComplexMatrix::from_fn(4, 4, |r, c| {
            let (i, j) = (r % 2, r / 2);
            if c == j + i * 2 {
                cx(1., 0.)
            } else {
                cx(0., 0.)
            }
        });
        let tr = Superoperator::new(s, t, Picture::Schrodinger, SuperKind::Channel { t: 0.0 }).unwrap();
        let r = verify_cptp(&tr, &Tolerances::default()).unwrap();
        assert!(!r.pass);
        assert!((r.choi_min_eig + 1.0).abs() < 1e-12);

        let gen = build_schrodinger_generator(&amplitude_damping(1.0)).unwrap();
        assert!(matches!(verify_cptp(&gen, &Tolerances::default()), Err(Error::WrongKind(_))));
    }

    #[test]
    fn dissipativity_flags_offending_vectors() {
        // G = 0 with jump a† at d=3: ½‖a† e_k‖² = (k+1)/2 for k < 2, zero at the top level.
        let (_, ad, _) = fock_operators(3).unwrap();
        let pair = GeneratorPair::new(Operator::zero(ad.space()), vec![ad]).unwrap();
        let v = pair.dissipativity_violations();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].basis_index, 1);
        assert!((v[0].value - 1.0).abs() < 1e-15);
        assert_eq!(v[1].basis_index, 0);
    }

    #[test]
    fn compression_to_full_space_is_identity_map() {
        let gen = build_schrodinger_generator(&amplitude_damping(1.0)).unwrap();
        let c = compress_superoperator(gen.matrix(), &ComplexMatrix::identity(2));
        assert!((&c - gen.matrix()).norm_max() < 1e-15);
    }
}
