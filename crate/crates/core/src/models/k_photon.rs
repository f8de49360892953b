//! k-photon exchange: single jump L = a^k − α^k.

use serde::{Deserialize, Serialize};

use super::lowering_power;
use crate::error::{Error, Result};
use crate::lindblad::{GKLSSpec, Superoperator};
use crate::numerics::{c64, cx, orthonormalize, vec_norm, ComplexMatrix};
use crate::operators::{HilbertSpace, Operator};
use crate::semigroup::channel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KPhotonParams {
    pub k: usize,
    pub alpha: f64,
    pub dim: usize,
}

impl KPhotonParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be at least 1"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if self.dim < 4 * self.k {
            return Err(Error::invalid("dim", format!("must be ≥ 4k = {}", 4 * self.k)));
        }
        let lost = self.truncated_tail();
        if lost > 1e-6 {
            return Err(Error::invalid(
                "dim",
                format!("coherent vectors lose {lost:.3e} of their mass at this truncation"),
            ));
        }
        Ok(())
    }

    /// Mass of a normalized coherent state beyond level dim − 1.
    pub fn truncated_tail(&self) -> f64 {
        let x = self.alpha * self.alpha;
        let mut term = 1.0_f64;
        let mut kept = 0.0;
        for n in 0..self.dim {
            if n > 0 {
                term *= x / n as f64;
            }
            kept += term;
        }
        (1.0 - kept * (-x).exp()).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct KPhoton {
    pub spec: GKLSSpec,
    /// Orthonormal basis of the dark space, one column per residue class n ≡ s (mod k).
    pub kernel_basis: ComplexMatrix,
    /// Gram–Schmidt orthonormalization of the normalized coherent vectors |α ω^r⟩.
    pub coherent_basis: ComplexMatrix,
    /// ‖L v‖ for each normalized coherent vector.
    pub coherent_residuals: Vec<f64>,
}

pub fn build_k_photon(p: &KPhotonParams) -> Result<KPhoton> {
    p.validate()?;
    let d = p.dim;
    let space = HilbertSpace::fock(d)?;
    let mut l = lowering_power(d, p.k);
    let ak = p.alpha.powi(p.k as i32);
    for i in 0..d {
        l[(i, i)] -= cx(ak, 0.0);
    }

    // α^n/√n! with the factorial accumulated in the ratio to avoid overflow.
    let amplitude = |z: c64| -> Vec<c64> {
        let mut out = Vec::with_capacity(d);
        let mut cur = cx(1.0, 0.0);
        for n in 0..d {
            if n > 0 {
                cur = cur * z / (n as f64).sqrt();
            }
            out.push(cur);
        }
        out
    };
    // Residue-class cats: α^{n−s}/√n! for n ≡ s (mod k), which stays regular at α = 0.
    let ak_step = p.alpha.powi(p.k as i32);
    let cats: Vec<Vec<c64>> = (0..p.k)
        .map(|s| {
            let mut v = vec![cx(0.0, 0.0); d];
            let mut cur = 1.0 / (1..=s).map(|m| m as f64).product::<f64>().sqrt();
            let mut n = s;
            while n < d {
                v[n] = cx(cur, 0.0);
                let grow: f64 = (n + 1..=n + p.k).map(|m| m as f64).product();
                cur *= ak_step / grow.sqrt();
                n += p.k;
            }
            let norm = vec_norm(&v);
            v.iter_mut().for_each(|z| *z /= norm);
            v
        })
        .collect();
    let kernel_basis = ComplexMatrix::from_columns(d, &cats);

    let coherent: Vec<Vec<c64>> = (0..p.k)
        .map(|r| {
            let phase = 2.0 * std::f64::consts::PI * r as f64 / p.k as f64;
            let z = c64::from_polar(p.alpha, phase);
            let mut v = amplitude(z);
            let norm = vec_norm(&v);
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    let coherent_residuals = coherent.iter().map(|v| vec_norm(&l.mul_vec(v))).collect();
    let coherent_basis = orthonormalize(&ComplexMatrix::from_columns(d, &coherent), 1e-8);

    let spec = GKLSSpec::new(Operator::zero(&space), vec![Operator::new(space, l)?])?;
    Ok(KPhoton {
        spec,
        kernel_basis,
        coherent_basis,
        coherent_residuals,
    })
}

/// V(ρ) = Σ tr(L ρ L†) over the jumps of `spec`.
pub fn lyapunov_value(spec: &GKLSSpec, rho: &ComplexMatrix) -> f64 {
    spec.jumps()
        .iter()
        .map(|l| l.matrix().matmul(rho).matmul(&l.matrix().adjoint()).trace().re)
        .sum()
}

/// V(Φ*_t(ρ)) at each requested time.
///
/// Increasing times are reached by stepping from the previous one; the step channel is reused
/// while the increment stays the same, so a uniform grid costs one exponential.
pub fn lyapunov_series(
    gen: &Superoperator,
    spec: &GKLSSpec,
    rho: &ComplexMatrix,
    times: &[f64],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(times.len());
    let mut state: Option<(f64, ComplexMatrix)> = None;
    let mut step: Option<(f64, Superoperator)> = None;
    for &t in times {
        let next = match state.take() {
            Some((prev, x)) if t >= prev => {
                let dt = t - prev;
                let reuse = step.as_ref().is_some_and(|(h, _)| (h - dt).abs() <= 1e-12 * dt.max(1.0));
                if !reuse {
                    step = Some((dt, channel(gen, dt)?));
                }
                step.as_ref().unwrap().1.apply(&x)
            }
            _ => channel(gen, t)?.apply(rho),
        };
        out.push(lyapunov_value(spec, &next));
        state = Some((t, next));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::DensityMatrix;

    #[test]
    fn coherent_residual_k1() {
        let m = build_k_photon(&KPhotonParams {
            k: 1,
            alpha: 2.0,
            dim: 30,
        })
        .unwrap();
        assert!(m.coherent_residuals[0] <= 1e-6);
        assert_eq!(m.kernel_basis.ncols(), 1);
    }

    #[test]
    fn alpha_zero_kernel_is_low_fock_states() {
        let m = build_k_photon(&KPhotonParams {
            k: 2,
            alpha: 0.0,
            dim: 10,
        })
        .unwrap();
        assert_eq!(m.kernel_basis.ncols(), 2);
        assert!((m.kernel_basis[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((m.kernel_basis[(1, 1)].re - 1.0).abs() < 1e-15);
        let l = m.spec.jumps()[0].matrix();
        assert!(l.matmul(&m.kernel_basis).norm_max() < 1e-15);
    }

    #[test]
    fn two_dimensional_dark_space() {
        let m = build_k_photon(&KPhotonParams {
            k: 2,
            alpha: 1.0,
            dim: 25,
        })
        .unwrap();
        assert_eq!(m.coherent_basis.ncols(), 2);
        let l = m.spec.jumps()[0].matrix();
        assert!(l.matmul(&m.kernel_basis).norm_max() < 1e-9);
    }

    #[test]
    fn lyapunov_of_first_excited_state() {
        let m = build_k_photon(&KPhotonParams {
            k: 1,
            alpha: 0.0,
            dim: 8,
        })
        .unwrap();
        let rho = DensityMatrix::basis_state(m.spec.space(), 1).unwrap();
        assert!((lyapunov_value(&m.spec, rho.matrix()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_short_truncation() {
        assert!(KPhotonParams {
            k: 1,
            alpha: 3.0,
            dim: 8
        }
        .validate()
        .is_err());
    }

    #[test]
    fn lyapunov_series_matches_direct_evaluation() {
        let m = build_k_photon(&KPhotonParams { k: 2, alpha: 0.7, dim: 8 }).unwrap();
        let gen = crate::lindblad::build_schrodinger_generator(&m.spec).unwrap();
        let rho = DensityMatrix::basis_state(m.spec.space(), 5).unwrap();
        let times = [0.0, 0.5, 1.0, 1.5, 1.7, 0.2, 3.0];
        let series = lyapunov_series(&gen, &m.spec, rho.matrix(), &times).unwrap();
        for (t, v) in times.iter().zip(&series) {
            let direct = lyapunov_value(&m.spec, &channel(&gen, *t).unwrap().apply(rho.matrix()));
            assert!((v - direct).abs() <= 1e-12 * direct.abs().max(1.0), "t = {t}");
        }
    }
}
