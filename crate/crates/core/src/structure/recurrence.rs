use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{Picture, Superoperator};
use crate::numerics::{ComplexMatrix, Tolerances};
use crate::operators::{max_eigenvalue, min_eigenvalue, support_projection, Operator, Subspace};
use crate::semigroup::{channel, invariant_states, InvariantStateSet};
use crate::spectral::gap_estimate;

use super::enclosures::is_enclosure;

/// Support of E*(I/d), the largest support of an invariant state.
pub fn positive_recurrent_subspace(gen: &Superoperator, tol: &Tolerances) -> Result<Subspace> {
    let inv = invariant_states(&gen.in_picture(Picture::Schrodinger), tol)?;
    r_plus_from(&inv, tol)
}

pub(crate) fn r_plus_from(inv: &InvariantStateSet, tol: &Tolerances) -> Result<Subspace> {
    support_projection(&inv.canonical_state.as_operator(), tol)
}

#[derive(Debug, Clone)]
pub struct RecurrentSplit {
    pub r_plus: Subspace,
    pub transient: Subspace,
    /// Always zero-dimensional in finite dimension.
    pub null_recurrent: Subspace,
    /// tr((I−P)Φ*_t(I/d)(I−P)) on the diagnostic grid.
    pub transient_mass: Vec<(f64, f64)>,
    pub transient_decay_ok: bool,
}

/// R+ and its complement; transient mass of I/d is tracked on a short time grid.
pub fn transient_split(gen: &Superoperator, tol: &Tolerances) -> Result<RecurrentSplit> {
    let schr = gen.in_picture(Picture::Schrodinger);
    let r_plus = positive_recurrent_subspace(&schr, tol)?;
    let transient = r_plus.complement()?;
    let d = schr.dim();
    let q = r_plus.complement_projector();
    let scale = gap_estimate(&schr, tol)?.unwrap_or(1.0);
    let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    let mut transient_mass = Vec::new();
    for k in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let t = k / scale;
        let rho = channel(&schr, t)?.apply(&mixed);
        let m = q.matmul(&rho).matmul(&q).trace().re;
        transient_mass.push((t, m));
    }
    let transient_decay_ok = transient_mass.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-10);
    Ok(RecurrentSplit {
        null_recurrent: Subspace::zero(schr.space()),
        r_plus,
        transient,
        transient_mass,
        transient_decay_ok,
    })
}

#[derive(Debug, Clone)]
pub struct AbsorptionEstimate {
    /// A(V) = E(P_V) with E the Heisenberg ergodic projection.
    pub operator: Operator,
    /// ‖Φ_T(P_V) − A(V)‖ at the largest checked T.
    pub residual: f64,
    pub residual_times: Vec<f64>,
    pub monotone_ok: bool,
    pub is_enclosure: bool,
    /// P_V ≤ A(V) ≤ I within psd_floor.
    pub sandwich_ok: bool,
}

/// Absorption operator of V; a non-enclosure V is evaluated best-effort and flagged.
pub fn absorption_operator(
    gen: &Superoperator,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<AbsorptionEstimate> {
    let schr = gen.in_picture(Picture::Schrodinger);
    schr.require_generator()?;
    let heis = schr.adjoint();
    let d = schr.dim();
    if v.ambient_dim() != d {
        return Err(Error::DimensionMismatch {
            context: "subspace vs generator",
            expected: d,
            found: v.ambient_dim(),
        });
    }
    let is_enclosure = is_enclosure(&schr, v)?;
    let inv = invariant_states(&schr, tol)?;
    let e_heis = inv.projection.adjoint();
    let p = v.projector();
    let a = e_heis.apply(p).hermitian_part();

    let scale = gap_estimate(&schr, tol)?.unwrap_or(1.0);
    let residual_times: Vec<f64> = [10.0, 50.0, 100.0].iter().map(|k| k / scale).collect();
    let mut residual = 0.0;
    for &t in &residual_times {
        let pt = channel(&heis, t)?.apply(p);
        residual = (&pt - &a).norm_spectral();
    }

    let mut monotone_ok = true;
    let mut prev = p.clone();
    for k in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let cur = channel(&heis, k / scale)?.apply(p);
        if min_eigenvalue(&(&cur - &prev).hermitian_part())? < -tol.psd_floor {
            monotone_ok = false;
        }
        prev = cur;
    }
    let id = ComplexMatrix::identity(d);
    let sandwich_ok = min_eigenvalue(&(&a - p))? >= -tol.psd_floor
        && min_eigenvalue(&(&id - &a))? >= -tol.psd_floor;
    Ok(AbsorptionEstimate {
        operator: Operator::new(schr.space().clone(), a)?,
        residual,
        residual_times,
        monotone_ok,
        is_enclosure,
        sandwich_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicCheck {
    pub attractive: bool,
    /// ‖A(R+) − I‖ in spectral norm.
    pub deviation: f64,
}

pub fn check_ergodic(gen: &Superoperator, tol: &Tolerances) -> Result<ErgodicCheck> {
    let schr = gen.in_picture(Picture::Schrodinger);
    let inv = invariant_states(&schr, tol)?;
    let r_plus = r_plus_from(&inv, tol)?;
    let a = inv.projection.adjoint().apply(r_plus.projector());
    let deviation = (&a - &ComplexMatrix::identity(schr.dim())).norm_spectral();
    Ok(ErgodicCheck {
        attractive: deviation <= tol.convergence_abs,
        deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RateCertificate {
    pub t0: f64,
    pub kappa: f64,
    /// −ln κ / t0; +∞ when R+ is the whole space.
    pub rate: f64,
    pub valid: bool,
    /// (t0, κ(t0)) for every candidate.
    pub candidates: Vec<(f64, f64)>,
    /// max over the check grid of λ_max(Φ_t(I−P) − κ^⌊t/t0⌋ (I−P)).
    pub max_excess: f64,
    pub check_grid: Vec<f64>,
}

/// 8 geometric points over [0.1, 10]/gap.
pub fn default_t0_candidates(gap: Option<f64>) -> Vec<f64> {
    let g = gap.filter(|g| *g > 0.0).unwrap_or(1.0);
    (0..8).map(|i| 0.1 * 100f64.powf(i as f64 / 7.0) / g).collect()
}

/// κ(t0) = λ_max(Φ_{t0}(I − P_{R+})); the candidate with the best rate −ln κ/t0 is
/// validated against Φ_t(I−P) ≤ κ^⌊t/t0⌋(I−P) on a grid up to 20·t0.
pub fn rate_certificate(
    gen: &Superoperator,
    t0_candidates: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<RateCertificate> {
    let schr = gen.in_picture(Picture::Schrodinger);
    schr.require_generator()?;
    let heis = schr.adjoint();
    let r_plus = positive_recurrent_subspace(&schr, tol)?;
    let candidates: Vec<f64> = match t0_candidates {
        Some(c) => c.to_vec(),
        None => default_t0_candidates(gap_estimate(&schr, tol)?),
    };
    if candidates.is_empty() || candidates.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("t0_candidates", "need at least one finite t0 > 0"));
    }
    if r_plus.is_full() {
        return Ok(RateCertificate {
            t0: candidates[0],
            kappa: 0.0,
            rate: f64::INFINITY,
            valid: true,
            candidates: candidates.iter().map(|&t| (t, 0.0)).collect(),
            max_excess: 0.0,
            check_grid: Vec::new(),
        });
    }
    let q = r_plus.complement_projector();
    let mut scored = Vec::with_capacity(candidates.len());
    for &t0 in &candidates {
        let k = max_eigenvalue(&channel(&heis, t0)?.apply(&q).hermitian_part())?;
        scored.push((t0, k.max(0.0)));
    }
    let best = scored
        .iter()
        .filter(|(_, k)| *k < 1.0 - 1e-9)
        .map(|&(t0, k)| (t0, k, -k.ln() / t0))
        .max_by(|a, b| a.2.total_cmp(&b.2));
    let Some((t0, kappa, rate)) = best else {
        let (t0, kappa) = scored[0];
        return Ok(RateCertificate {
            t0,
            kappa,
            rate: -kappa.ln() / t0,
            valid: false,
            candidates: scored,
            max_excess: f64::NAN,
            check_grid: Vec::new(),
        });
    };

    let lo = t0 / 10.0;
    let hi = 20.0 * t0;
    let mut grid: Vec<f64> = (0..30).map(|i| lo * (hi / lo).powf(i as f64 / 29.0)).collect();
    grid.extend((1..=20).map(|n| n as f64 * t0));
    grid.sort_by(f64::total_cmp);
    let mut max_excess = f64::NEG_INFINITY;
    for &t in &grid {
        let n = (t / t0 + 1e-12).floor() as i32;
        let lhs = channel(&heis, t)?.apply(&q);
        let diff = (&lhs - &q.scale_real(kappa.powi(n))).hermitian_part();
        max_excess = max_excess.max(max_eigenvalue(&diff)?);
    }
    Ok(RateCertificate {
        t0,
        kappa,
        rate,
        valid: max_excess <= tol.psd_floor,
        candidates: scored,
        max_excess,
        check_grid: grid,
    })
}
