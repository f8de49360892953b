//! Irreducibility, primitivity, spectral gap and exponential convergence bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{Picture, Superoperator};
use crate::numerics::{c64, eigenvalues, hermitian_eigen, Tolerances};
use crate::operators::trace_norm_hermitian;
use crate::random::{random_state, seeded};
use crate::semigroup::{channel, ergodic_projection, invariant_states};

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Sorted by descending real part, then ascending |Im|, then positive Im first.
    pub eigenvalues: Vec<c64>,
    pub zero_multiplicity: usize,
    /// Eigenvalue of largest real part among those with Re < −zero band; None if none decay.
    pub lambda2: Option<c64>,
    pub gap: Option<f64>,
    pub irreducible: bool,
    pub primitive: bool,
    /// max Re λ; positive values beyond the band indicate a broken generator.
    pub max_real_part: f64,
}

fn spectral_order(a: &c64, b: &c64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re)
        .then(a.im.abs().total_cmp(&b.im.abs()))
        .then(b.im.total_cmp(&a.im))
}

/// λ₂ among `vals`: largest real part below −band; near-ties go to smaller |Im|, then Im > 0.
fn second_eigenvalue(vals: &[c64], band: f64) -> Option<c64> {
    let decaying: Vec<&c64> = vals.iter().filter(|z| z.re < -band).collect();
    let top = decaying.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    decaying
        .into_iter()
        .filter(|z| z.re >= top - band)
        .min_by(|a, b| {
            a.im.abs()
                .total_cmp(&b.im.abs())
                .then(b.im.total_cmp(&a.im))
        })
        .copied()
}

/// Kernel of L* is one-dimensional and its state is faithful.
pub fn is_irreducible(gen: &Superoperator, tol: &Tolerances) -> Result<bool> {
    let schr = gen.in_picture(Picture::Schrodinger);
    let inv = invariant_states(&schr, tol)?;
    if inv.kernel_dim() != 1 {
        return Ok(false);
    }
    let (vals, _) = hermitian_eigen(inv.canonical_state.matrix())?;
    let lmax = vals.last().copied().unwrap_or(0.0);
    Ok(vals.iter().all(|&v| v > tol.nullspace_rel * lmax))
}

fn peripheral_count(gen: &Superoperator, t: f64, tol: &Tolerances) -> Result<usize> {
    let ch = channel(gen, t)?;
    Ok(eigenvalues(ch.matrix())?
        .iter()
        .filter(|z| z.norm() >= 1.0 - tol.peripheral)
        .count())
}

/// Irreducible, and exp(t·gen) has 1 as its only eigenvalue of modulus one.
///
/// The verdict must not depend on t; it is recomputed at 1.618·t and a
/// disagreement is reported as a numerical inconsistency.
pub fn is_primitive(gen: &Superoperator, t: f64, tol: &Tolerances) -> Result<bool> {
    gen.require_generator()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be finite and > 0"));
    }
    if !is_irreducible(gen, tol)? {
        return Ok(false);
    }
    let first = peripheral_count(gen, t, tol)? == 1;
    let second = peripheral_count(gen, 1.618 * t, tol)? == 1;
    if first != second {
        return Err(Error::Inconsistent(format!(
            "primitivity verdict changes between t = {t} and t = {}",
            1.618 * t
        )));
    }
    Ok(first)
}

pub fn spectral_gap(gen: &Superoperator, tol: &Tolerances) -> Result<SpectralReport> {
    gen.require_generator()?;
    let mut vals = eigenvalues(gen.matrix())?;
    vals.sort_by(spectral_order);
    let zero_multiplicity = vals
        .iter()
        .filter(|z| z.re.abs() <= tol.zero_eigenvalue && z.im.abs() <= tol.zero_eigenvalue)
        .count();
    let lambda2 = second_eigenvalue(&vals, tol.zero_eigenvalue);
    let irreducible = is_irreducible(gen, tol)?;
    let primitive = irreducible && is_primitive(gen, 1.0, tol)?;
    Ok(SpectralReport {
        max_real_part: vals.first().map_or(0.0, |z| z.re),
        gap: lambda2.map(|z| -z.re),
        eigenvalues: vals,
        zero_multiplicity,
        lambda2,
        irreducible,
        primitive,
    })
}

/// Decay rate of the slowest decaying mode, without the irreducibility checks.
pub fn gap_estimate(gen: &Superoperator, tol: &Tolerances) -> Result<Option<f64>> {
    let vals = eigenvalues(gen.matrix())?;
    Ok(second_eigenvalue(&vals, tol.zero_eigenvalue).map(|z| -z.re))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceBound {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub grid_max_t: f64,
    pub grid: Vec<f64>,
    /// Random states checked against ‖Φ*_t(ρ) − ρ_∞‖₁ ≤ C e^{−ct} on the grid.
    pub states_checked: usize,
    /// Largest ‖Φ*_t(ρ) − ρ_∞‖₁ / (C e^{−ct}) seen in the check.
    pub worst_ratio: f64,
    pub verified: bool,
}

const GRID_POINTS: usize = 40;
const STAGNATION: usize = 10;

fn geometric_grid(t_max: f64) -> Vec<f64> {
    let lo = 1e-3 * t_max;
    let mut g = vec![0.0];
    g.extend((0..GRID_POINTS).map(|i| lo * (t_max / lo).powf(i as f64 / (GRID_POINTS - 1) as f64)));
    g
}

/// C = max over a grid of e^{ct}·√d·‖Φ*_t − Φ*_∞‖₂, checked on random states.
pub fn convergence_bound(
    gen: &Superoperator,
    c: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<ConvergenceBound> {
    let schr = gen.in_picture(Picture::Schrodinger);
    schr.require_generator()?;
    let gap = gap_estimate(&schr, tol)?
        .ok_or_else(|| Error::invalid("c", "generator has no decaying modes"))?;
    if !(c > 0.0 && c < gap) {
        return Err(Error::invalid("c", format!("must lie in (0, gap = {gap})")));
    }
    // A rank-one limit is all the bound uses; faithfulness of ρ_∞ is not needed.
    let e = ergodic_projection(&schr, tol)?;
    if e.kernel_dim != 1 || !e.semisimple_ok || peripheral_count(&schr, 1.0, tol)? != 1 {
        return Err(Error::invalid("gen", "convergence bound needs a unique invariant state and no other peripheral eigenvalue"));
    }
    let d = schr.dim();
    let sqrt_d = (d as f64).sqrt();

    let mut t_max = 10.0 / (gap - c);
    let (grid, big_c) = loop {
        let grid = geometric_grid(t_max);
        let mut vals = Vec::with_capacity(grid.len());
        for &t in &grid {
            let diff = channel(&schr, t)?.matrix() - &e.matrix;
            vals.push((c * t).exp() * sqrt_d * diff.norm_spectral());
        }
        let mut running = 0.0_f64;
        let mut below = 0usize;
        for &v in &vals {
            if v < running {
                below += 1;
            } else {
                below = 0;
                running = v;
            }
        }
        if below >= STAGNATION || t_max > 1e6 / gap {
            break (grid, running);
        }
        t_max *= 2.0;
    };

    let mut rng = seeded(seed);
    let n_states = 20;
    let mut worst_ratio = 0.0_f64;
    for _ in 0..n_states {
        let rho = random_state(schr.space(), &mut rng)?;
        let limit = e.apply(rho.matrix());
        for &t in &grid {
            let rt = channel(&schr, t)?.apply(rho.matrix());
            let dist = trace_norm_hermitian(&(&rt - &limit).hermitian_part())?;
            worst_ratio = worst_ratio.max(dist / (big_c * (-c * t).exp()));
        }
    }
    Ok(ConvergenceBound {
        c,
        big_c,
        grid_max_t: *grid.last().unwrap(),
        grid,
        states_checked: n_states,
        worst_ratio,
        verified: worst_ratio <= 1.0 + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_schrodinger_generator, GKLSSpec};
    use crate::numerics::{cx, ComplexMatrix};
    use crate::operators::{fock_operators, HilbertSpace, Operator};

    fn damping(gamma: f64) -> Superoperator {
        let (a, _, _) = fock_operators(2).unwrap();
        let l = a.with_matrix(a.matrix().scale_real(gamma.sqrt())).unwrap();
        build_schrodinger_generator(&GKLSSpec::new(Operator::zero(a.space()), vec![l]).unwrap()).unwrap()
    }

    fn commutator() -> Superoperator {
        let s = HilbertSpace::abstract_space(2).unwrap();
        let h = Operator::new(s, ComplexMatrix::from_real_diag(&[0.0, 1.0])).unwrap();
        build_schrodinger_generator(&GKLSSpec::new(h, vec![]).unwrap()).unwrap()
    }

    #[test]
    fn ordering_breaks_ties_by_imaginary_part() {
        let mut v = vec![cx(-1.0, 2.0), cx(0.0, 0.0), cx(-1.0, -2.0), cx(-1.0, 0.0)];
        v.sort_by(spectral_order);
        assert_eq!(v, vec![cx(0.0, 0.0), cx(-1.0, 0.0), cx(-1.0, 2.0), cx(-1.0, -2.0)]);
        assert_eq!(second_eigenvalue(&v[..1], 1e-9), None);
        assert_eq!(second_eigenvalue(&[cx(-1.0, -3.0), cx(-1.0, 3.0)], 1e-9), Some(cx(-1.0, 3.0)));
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let tol = Tolerances::default();
        let r = spectral_gap(&damping(1.0), &tol).unwrap();
        let want = [0.0, -0.5, -0.5, -1.0];
        for (z, w) in r.eigenvalues.iter().zip(want) {
            assert!((z.re - w).abs() < 1e-10 && z.im.abs() < 1e-10);
        }
        assert!((r.gap.unwrap() - 0.5).abs() < 1e-10);
        assert!(!r.irreducible);
        assert!(!r.primitive);
    }

    #[test]
    fn commutator_has_no_gap_and_is_not_primitive() {
        let tol = Tolerances::default();
        let r = spectral_gap(&commutator(), &tol).unwrap();
        assert!(r.gap.is_none());
        assert!(!is_primitive(&commutator(), 0.7, &tol).unwrap());
        assert!(is_primitive(&commutator(), 0.0, &tol).is_err());
    }

    #[test]
    fn zero_generator_is_not_primitive() {
        let s = HilbertSpace::abstract_space(2).unwrap();
        let gen = build_schrodinger_generator(&GKLSSpec::new(Operator::zero(&s), vec![]).unwrap())
            .unwrap();
        assert!(!is_primitive(&gen, 1.0, &Tolerances::default()).unwrap());
    }

    #[test]
    fn convergence_bound_rejects_c_outside_gap() {
        // Damping plus pumping is primitive with gap (γ↓ + γ↑)/2.
        let (a, ad, _) = fock_operators(2).unwrap();
        let spec = GKLSSpec::new(Operator::zero(a.space()), vec![a, ad.with_matrix(ad.matrix().scale_real(0.5)).unwrap()])
            .unwrap();
        let gen = build_schrodinger_generator(&spec).unwrap();
        let tol = Tolerances::default();
        let gap = spectral_gap(&gen, &tol).unwrap().gap.unwrap();
        assert!((gap - 0.625).abs() < 1e-10);
        assert!(convergence_bound(&gen, gap, 0, &tol).is_err());
        assert!(convergence_bound(&gen, 0.0, 0, &tol).is_err());
        let b1 = convergence_bound(&gen, 0.5 * gap, 3, &tol).unwrap();
        let b2 = convergence_bound(&gen, 0.9 * gap, 3, &tol).unwrap();
        assert!(b1.verified && b2.verified);
        assert!(b2.big_c >= b1.big_c);
    }

    #[test]
    fn convergence_bound_for_pure_steady_state() {
        let tol = Tolerances::default();
        let b = convergence_bound(&damping(1.0), 0.25, 1, &tol).unwrap();
        assert!(b.verified);
        // ‖Φ*_0 − Φ*_∞‖ ≤ C at t = 0.
        assert!(b.big_c >= 1.0);
        assert!(convergence_bound(&commutator(), 0.1, 1, &tol).is_err());
    }
}
