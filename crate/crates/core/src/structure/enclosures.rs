use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lindblad::{compress_superoperator, GKLSSpec, Picture, SuperKind, Superoperator};
use crate::numerics::{hermitian_eigen, nullspace_scaled, range_basis, ComplexMatrix, Tolerances};
use crate::operators::{min_eigenvalue, DensityMatrix, Subspace};
use crate::random::seeded;
use crate::semigroup::{hermitian_basis, invariant_states};

use super::recurrence::r_plus_from;

const ENCLOSURE_REL: f64 = 1e-9;

/// max(‖P⊥ L_l P‖, ‖P⊥ G P‖) with G = −iH − ½ΣL†L, relative to max(1, ‖·‖).
pub fn enclosure_defect_gkls(spec: &GKLSSpec, v: &Subspace) -> Result<f64> {
    spec.space().check_same(v.space())?;
    let p = v.projector();
    let q = v.complement_projector();
    let mut worst: f64 = 0.0;
    let mut ops: Vec<ComplexMatrix> = spec.jumps().iter().map(|l| l.matrix().clone()).collect();
    ops.push(spec.effective_g());
    for m in &ops {
        let leak = q.matmul(m).matmul(p).norm_spectral();
        worst = worst.max(leak / m.norm_spectral().max(1.0));
    }
    Ok(worst)
}

pub fn is_enclosure_gkls(spec: &GKLSSpec, v: &Subspace) -> Result<bool> {
    Ok(enclosure_defect_gkls(spec, v)? <= ENCLOSURE_REL)
}

/// Largest ‖T(E_ij) − P T(E_ij) P‖_F over the units E_ij = |v_i⟩⟨v_j| of B(V), relative to
/// max(1, ‖T‖). Works for generators and channels alike: V is an enclosure exactly when the
/// Schrödinger map leaves B(V) invariant.
pub fn enclosure_defect(s: &Superoperator, v: &Subspace) -> f64 {
    let schr = s.in_picture(Picture::Schrodinger);
    let p = v.projector();
    let basis = v.basis();
    let scale = schr.matrix().norm_max().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..v.dim() {
        for j in 0..v.dim() {
            let e = ComplexMatrix::outer(&basis.column(i), &basis.column(j));
            let out = schr.apply(&e);
            let inside = p.matmul(&out).matmul(p);
            worst = worst.max((&out - &inside).norm_fro() / scale);
        }
    }
    worst
}

pub fn is_enclosure(s: &Superoperator, v: &Subspace) -> Result<bool> {
    s.space().check_same(v.space())?;
    Ok(enclosure_defect(s, v) <= ENCLOSURE_REL)
}

#[derive(Debug, Clone)]
pub struct BetaBlock {
    pub subspace: Subspace,
    /// Minimal enclosures V_{β,γ}; a seed-dependent choice.
    pub chosen_factors: Vec<Subspace>,
    pub factor_states: Vec<DensityMatrix>,
}

#[derive(Debug, Clone)]
pub struct EnclosureDecomposition {
    pub alpha_blocks: Vec<Subspace>,
    pub alpha_states: Vec<DensityMatrix>,
    pub beta_blocks: Vec<BetaBlock>,
    /// Largest certification defect over all pieces.
    pub residual: f64,
    pub seed: u64,
    /// Set when a β-block is present, since its factors depend on the seed.
    pub non_canonical: bool,
}

impl EnclosureDecomposition {
    /// Every minimal enclosure in the decomposition with its invariant state.
    pub fn pieces(&self) -> Vec<(&Subspace, &DensityMatrix)> {
        let mut out: Vec<_> = self.alpha_blocks.iter().zip(&self.alpha_states).collect();
        for b in &self.beta_blocks {
            out.extend(b.chosen_factors.iter().zip(&b.factor_states));
        }
        out
    }
}

struct RawBlock {
    /// Orthonormal basis in ambient coordinates.
    basis: ComplexMatrix,
    /// Factor bases in ambient coordinates; a single entry for α-blocks.
    factors: Vec<ComplexMatrix>,
    multiplicity: usize,
}

fn random_combination(elems: &[ComplexMatrix], rng: &mut impl Rng) -> ComplexMatrix {
    let n = elems[0].nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for e in elems {
        let g: f64 = rng.sample(StandardNormal);
        out += &e.scale_real(g);
    }
    out
}

/// Spectral projections of a Hermitian matrix, grouped by eigenvalue clusters; each entry is a
/// basis of an eigenspace.
fn eigen_clusters(h: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (v - vals[*g.last().unwrap()]).abs() <= 1e-6 * v.abs().max(1.0) => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    Ok(groups.into_iter().map(|g| vecs.select(&(0..h.nrows()).collect::<Vec<_>>(), &g)).collect())
}

fn unvec_all(cols: &ComplexMatrix, n: usize) -> Vec<ComplexMatrix> {
    (0..cols.ncols()).map(|k| ComplexMatrix::unvectorize(&cols.column(k), n)).collect()
}

/// Hermitian basis of the center of the *-algebra spanned by `f`.
fn center(f: &[ComplexMatrix], tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let nf = f.len();
    let n = f[0].nrows();
    let rows = nf * n * n;
    let mut cons = ComplexMatrix::zeros(rows, nf);
    for (j, fj) in f.iter().enumerate() {
        for (k, fk) in f.iter().enumerate() {
            let comm = &fj.matmul(fk) - &fk.matmul(fj);
            for (idx, val) in comm.vectorize().into_iter().enumerate() {
                cons[(k * n * n + idx, j)] = val;
            }
        }
    }
    // F elements have unit Frobenius norm, so commutators are O(1).
    let coeffs = nullspace_scaled(&cons, 1.0, tol)?;
    let raw: Vec<ComplexMatrix> = (0..coeffs.ncols())
        .map(|c| {
            let mut z = ComplexMatrix::zeros(n, n);
            for (j, fj) in f.iter().enumerate() {
                z += &fj.scale(coeffs[(j, c)]);
            }
            z
        })
        .collect();
    hermitian_basis(&raw, raw.len())
}

fn algebra_blocks(
    heis: &Superoperator,
    r_plus: &Subspace,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<RawBlock>> {
    let q = r_plus.basis();
    let r = r_plus.dim();
    let compressed = compress_superoperator(heis.matrix(), q);
    let f_cols = nullspace_scaled(&compressed, heis.matrix().norm_spectral(), tol)?;
    if f_cols.ncols() == 0 {
        return Err(Error::EmptyKernel);
    }
    let f = hermitian_basis(&unvec_all(&f_cols, r), f_cols.ncols())?;
    let z = center(&f, tol)?;
    let mut rng = seeded(seed);
    let central = random_combination(&z, &mut rng);
    let mut out = Vec::new();
    for (b, qb) in eigen_clusters(&central)?.into_iter().enumerate() {
        let n = qb.ncols();
        let fb_raw: Vec<ComplexMatrix> = f
            .iter()
            .map(|x| qb.adjoint().matmul(x).matmul(&qb))
            .collect();
        let mut stacked = ComplexMatrix::zeros(n * n, fb_raw.len());
        for (k, x) in fb_raw.iter().enumerate() {
            for (idx, val) in x.vectorize().into_iter().enumerate() {
                stacked[(idx, k)] = val;
            }
        }
        let fb_span = range_basis(&stacked, tol.nullspace_rel)?;
        let dim = fb_span.ncols();
        let m = (dim as f64).sqrt().round() as usize;
        if m * m != dim || m == 0 || n % m != 0 {
            return Err(Error::Certification {
                block: b,
                reason: format!("restricted fixed-point algebra has dimension {dim}, not a square dividing {n}"),
            });
        }
        let fb = hermitian_basis(&unvec_all(&fb_span, n), dim)?;
        let zb = center(&fb, tol)?;
        if zb.len() != 1 {
            return Err(Error::Certification {
                block: b,
                reason: format!("block center has dimension {}", zb.len()),
            });
        }
        let basis = q.matmul(&qb);
        let factors = if m == 1 {
            vec![basis.clone()]
        } else {
            let h = random_combination(&fb, &mut rng);
            let fs = eigen_clusters(&h)?;
            if fs.len() != m || fs.iter().any(|x| x.ncols() != n / m) {
                return Err(Error::Certification {
                    block: b,
                    reason: format!("expected {m} factors of dimension {}", n / m),
                });
            }
            fs.iter().map(|x| basis.matmul(x)).collect()
        };
        out.push(RawBlock { basis, factors, multiplicity: m });
    }
    Ok(out)
}

/// Certifies one piece: enclosure, unique invariant state of full support.
fn certify_piece(
    schr: &Superoperator,
    v: &Subspace,
    block: usize,
    tol: &Tolerances,
) -> Result<(DensityMatrix, f64)> {
    let defect = enclosure_defect(schr, v);
    if defect > ENCLOSURE_REL {
        return Err(Error::Certification {
            block,
            reason: format!("not an enclosure (defect {defect:.3e})"),
        });
    }
    let local = compress_superoperator(schr.matrix(), v.basis());
    let ker = nullspace_scaled(&local, schr.matrix().norm_spectral(), tol)?;
    if ker.ncols() != 1 {
        return Err(Error::Certification {
            block,
            reason: format!("restricted invariant-state kernel has dimension {}", ker.ncols()),
        });
    }
    let n = v.dim();
    let mut x = ComplexMatrix::unvectorize(&ker.column(0), n);
    let tr = x.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Certification { block, reason: "invariant element is traceless".into() });
    }
    x = x.scale(tr.inv()).hermitian_part();
    let min = min_eigenvalue(&x)?;
    if min <= tol.psd_floor {
        return Err(Error::Certification {
            block,
            reason: format!("invariant state is not faithful (min eigenvalue {min:.3e})"),
        });
    }
    let state = DensityMatrix::from_clipped(schr.space().clone(), &v.lift(&x))?;
    Ok((state, defect))
}

fn first_index(v: &Subspace) -> usize {
    let p = v.projector();
    (0..p.nrows()).find(|&i| p[(i, i)].re > 1e-8).unwrap_or(usize::MAX)
}

/// Orthogonal decomposition of R+ into α-blocks (unique minimal enclosures) and β-blocks with
/// a seed-dependent choice of minimal-enclosure factors. Every piece is certified; the block
/// structure is re-derived with two further seeds and must agree.
pub fn minimal_enclosures(
    gen: &Superoperator,
    seed: u64,
    tol: &Tolerances,
) -> Result<EnclosureDecomposition> {
    gen.require_generator()?;
    let schr = gen.in_picture(Picture::Schrodinger);
    let heis = schr.adjoint();
    let inv = invariant_states(&schr, tol)?;
    let r_plus = r_plus_from(&inv, tol)?;
    if r_plus.is_zero() {
        return Err(Error::EmptyKernel);
    }
    let raw = algebra_blocks(&heis, &r_plus, seed, tol)?;
    let shape = |blocks: &[RawBlock]| {
        let mut s: Vec<(usize, usize)> = blocks.iter().map(|b| (b.basis.ncols(), b.multiplicity)).collect();
        s.sort_unstable();
        s
    };
    let reference = shape(&raw);
    for extra in 1..=2 {
        let again = algebra_blocks(&heis, &r_plus, seed.wrapping_add(extra), tol)?;
        if shape(&again) != reference {
            return Err(Error::Certification {
                block: 0,
                reason: format!("block structure differs under seed {}", seed.wrapping_add(extra)),
            });
        }
    }

    let space = schr.space();
    let mut residual: f64 = 0.0;
    let mut alpha: Vec<(Subspace, DensityMatrix)> = Vec::new();
    let mut beta: Vec<BetaBlock> = Vec::new();
    for (b, block) in raw.into_iter().enumerate() {
        let subspace = Subspace::from_orthonormal(space, block.basis)?;
        let mut pieces = Vec::new();
        for fb in block.factors {
            let v = Subspace::from_orthonormal(space, fb)?;
            let (state, defect) = certify_piece(&schr, &v, b, tol)?;
            residual = residual.max(defect);
            pieces.push((v, state));
        }
        if block.multiplicity == 1 {
            alpha.push(pieces.pop().expect("one factor"));
        } else {
            pieces.sort_by_key(|(v, _)| first_index(v));
            let (chosen_factors, factor_states) = pieces.into_iter().unzip();
            beta.push(BetaBlock { subspace, chosen_factors, factor_states });
        }
    }
    alpha.sort_by_key(|(v, _)| first_index(v));
    beta.sort_by_key(|b| first_index(&b.subspace));

    let decomposition = {
        let (alpha_blocks, alpha_states) = alpha.into_iter().unzip();
        EnclosureDecomposition {
            alpha_blocks,
            alpha_states,
            non_canonical: !beta.is_empty(),
            beta_blocks: beta,
            residual,
            seed,
        }
    };
    let pieces = decomposition.pieces();
    for (i, (a, _)) in pieces.iter().enumerate() {
        for (b, _) in &pieces[i + 1..] {
            let overlap = a.projector().matmul(b.projector()).norm_spectral();
            if overlap > 1e-8 {
                return Err(Error::Certification {
                    block: i,
                    reason: format!("pieces overlap ({overlap:.3e})"),
                });
            }
        }
    }
    Ok(decomposition)
}

/// Σ tr(P_i ρ) ρ_i over all minimal enclosures of the decomposition. Requires R+ to be the
/// whole space and ρ block diagonal with respect to the pieces.
pub fn block_diagonal_limit(
    gen: &Superoperator,
    rho: &DensityMatrix,
    decomposition: &EnclosureDecomposition,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if let SuperKind::Channel { .. } = gen.kind() {
        return Err(Error::WrongKind("block_diagonal_limit needs a generator"));
    }
    gen.space().check_same(rho.space())?;
    let pieces = decomposition.pieces();
    let d = gen.dim();
    let covered: usize = pieces.iter().map(|(v, _)| v.dim()).sum();
    if covered != d {
        return Err(Error::invalid(
            "decomposition",
            format!("pieces cover {covered} of {d} dimensions; the transient part must be empty"),
        ));
    }
    let _ = tol;
    let mut diag = ComplexMatrix::zeros(d, d);
    let mut limit = ComplexMatrix::zeros(d, d);
    for (v, state) in &pieces {
        let p = v.projector();
        diag += &p.matmul(rho.matrix()).matmul(p);
        let w = p.matmul(rho.matrix()).trace().re;
        limit += &state.matrix().scale_real(w);
    }
    let mass = (rho.matrix() - &diag).norm_fro();
    if mass > 1e-8 {
        return Err(Error::NotBlockDiagonal { mass });
    }
    DensityMatrix::from_clipped(gen.space().clone(), &limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_schrodinger_generator;
    use crate::models::{build_two_photon, TwoPhotonParams};
    use crate::operators::{fock_operators, HilbertSpace, Operator};
    use crate::semigroup::evolve;

    fn damping_spec() -> GKLSSpec {
        let (a, _, _) = fock_operators(2).unwrap();
        GKLSSpec::new(Operator::zero(a.space()), vec![a]).unwrap()
    }

    #[test]
    fn damping_enclosures() {
        let spec = damping_spec();
        let gen = build_schrodinger_generator(&spec).unwrap();
        let s = spec.space().clone();
        let e0 = Subspace::coordinate(&s, &[0]).unwrap();
        let e1 = Subspace::coordinate(&s, &[1]).unwrap();
        assert!(is_enclosure_gkls(&spec, &Subspace::full(&s)).unwrap());
        assert!(is_enclosure_gkls(&spec, &e0).unwrap());
        assert!(!is_enclosure_gkls(&spec, &e1).unwrap());
        assert!(is_enclosure(&gen, &e0).unwrap());
        assert!(!is_enclosure(&gen, &e1).unwrap());
        assert!(is_enclosure(&gen.adjoint(), &e0).unwrap());
        let dec = minimal_enclosures(&gen, 7, &Tolerances::default()).unwrap();
        assert_eq!(dec.alpha_blocks.len(), 1);
        assert!(dec.beta_blocks.is_empty() && !dec.non_canonical);
        assert_eq!(dec.alpha_blocks[0].coordinate_indices(), Some(vec![0]));
    }

    #[test]
    fn two_independent_blocks_are_alpha() {
        // Damping+pumping on {e0,e1} and on {e2,e3}, not coupled.
        let s = HilbertSpace::abstract_space(4).unwrap();
        let jumps = [(0, 1, 1.0), (1, 0, 0.5), (2, 3, 2.0), (3, 2, 1.0)]
            .iter()
            .map(|&(i, j, g)| Operator::new(s.clone(), ComplexMatrix::unit(4, i, j).scale_real(g)).unwrap())
            .collect();
        let spec = GKLSSpec::new(Operator::zero(&s), jumps).unwrap();
        let gen = build_schrodinger_generator(&spec).unwrap();
        let tol = Tolerances::default();
        let dec = minimal_enclosures(&gen, 1, &tol).unwrap();
        assert_eq!(dec.alpha_blocks.len(), 2);
        assert_eq!(dec.alpha_blocks[0].coordinate_indices(), Some(vec![0, 1]));
        assert_eq!(dec.alpha_blocks[1].coordinate_indices(), Some(vec![2, 3]));
        assert!(dec.residual < 1e-9);

        let rho = DensityMatrix::maximally_mixed(&s);
        let limit = block_diagonal_limit(&gen, &rho, &dec, &tol).unwrap();
        let late = evolve(&gen, &rho.as_operator(), 60.0).unwrap();
        assert!((limit.matrix() - late.matrix()).norm_max() < 1e-8);

        let coherent = DensityMatrix::pure(&s, &[cx(0.5f64.sqrt()), cx(0.0), cx(0.5f64.sqrt()), cx(0.0)]).unwrap();
        assert!(matches!(
            block_diagonal_limit(&gen, &coherent, &dec, &tol),
            Err(Error::NotBlockDiagonal { .. })
        ));
    }

    fn cx(x: f64) -> crate::numerics::c64 {
        crate::numerics::cx(x, 0.0)
    }

    #[test]
    fn two_photon_lambda_zero_has_beta_block() {
        let p = TwoPhotonParams { lambda: 0.0, mu: 1.0, omega: 2.0, dim: 12 };
        let gen = build_schrodinger_generator(&build_two_photon(&p).unwrap()).unwrap();
        let dec = minimal_enclosures(&gen, 3, &Tolerances::default()).unwrap();
        assert!(dec.alpha_blocks.is_empty());
        assert_eq!(dec.beta_blocks.len(), 1);
        let b = &dec.beta_blocks[0];
        assert_eq!(b.subspace.coordinate_indices(), Some(vec![0, 1]));
        assert_eq!(b.chosen_factors.len(), 2);
        assert!(b.chosen_factors.iter().all(|f| f.dim() == 1));
        assert!(dec.non_canonical);
    }
}
