//! Two-photon absorption and emission: H = ω a†²a², jumps μa² and λa†².

use serde::{Deserialize, Serialize};

use super::{falling2, lowering_power, real_diag};
use crate::error::{Error, Result};
use crate::lindblad::{GKLSSpec, GeneratorPair};
use crate::numerics::{c64, cx, ComplexMatrix, Tolerances};
use crate::operators::{DensityMatrix, HilbertSpace, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPhotonParams {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
    pub dim: usize,
}

impl TwoPhotonParams {
    pub fn nu(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid("lambda", "must be finite and ≥ 0"));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::invalid("mu", "must be finite and > 0"));
        }
        if !self.omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        if self.nu() >= 1.0 {
            return Err(Error::invalid("lambda", format!("nu = lambda/mu = {} must be < 1", self.nu())));
        }
        if self.dim < 8 || !self.dim.is_multiple_of(2) {
            return Err(Error::invalid("dim", format!("must be even and ≥ 8, got {}", self.dim)));
        }
        Ok(())
    }

    fn space(&self) -> Result<HilbertSpace> {
        HilbertSpace::fock(self.dim)
    }
}

/// GKLS data on the truncation. A zero λ drops the creation jump.
pub fn build_two_photon(p: &TwoPhotonParams) -> Result<GKLSSpec> {
    p.validate()?;
    let d = p.dim;
    let space = p.space()?;
    let a2 = lowering_power(d, 2);
    let h = real_diag((0..d).map(|n| p.omega * falling2(n)));
    let mut jumps = vec![Operator::new(space.clone(), a2.scale_real(p.mu))?];
    if p.lambda > 0.0 {
        jumps.push(Operator::new(space.clone(), a2.adjoint().scale_real(p.lambda))?);
    }
    GKLSSpec::new(Operator::new(space, h)?, jumps)
}

/// G = −λ²/2 a²a†² − μ²/2 a†²a² − iω a†²a² taken as the corner of the infinite
/// matrix, paired with the truncated jumps.
pub fn two_photon_generator_pair(p: &TwoPhotonParams) -> Result<GeneratorPair> {
    let spec = build_two_photon(p)?;
    let d = p.dim;
    let g = ComplexMatrix::from_diag(
        &(0..d)
            .map(|n| {
                let up = ((n + 1) * (n + 2)) as f64;
                let down = falling2(n);
                cx(-0.5 * p.lambda * p.lambda * up - 0.5 * p.mu * p.mu * down, -p.omega * down)
            })
            .collect::<Vec<_>>(),
    );
    GeneratorPair::new(Operator::new(spec.space().clone(), g)?, spec.jumps().to_vec())
}

/// max |G_gkls − G_pair| over indices < dim − 2, where truncation does not reach.
pub fn two_photon_g_residual(p: &TwoPhotonParams) -> Result<f64> {
    let spec = build_two_photon(p)?;
    let pair = two_photon_generator_pair(p)?;
    let g = spec.effective_g();
    let inner = p.dim - 2;
    let mut worst = 0.0_f64;
    for i in 0..inner {
        for j in 0..inner {
            worst = worst.max((g[(i, j)] - pair.g.matrix()[(i, j)]).norm());
        }
    }
    Ok(worst)
}

/// Truncated ρ_e ∝ Σ ν^{2k}|e_2k⟩⟨e_2k| and ρ_o ∝ Σ ν^{2k}|e_{2k+1}⟩⟨e_{2k+1}|,
/// renormalized; leakage is the mass of the infinite state beyond the cut.
pub fn two_photon_reference_states(p: &TwoPhotonParams) -> Result<(DensityMatrix, DensityMatrix)> {
    p.validate()?;
    if p.lambda == 0.0 {
        return Err(Error::invalid(
            "lambda",
            "reference states need lambda > 0; use the lambda = 0 invariant family",
        ));
    }
    let nu2 = p.nu() * p.nu();
    let space = p.space()?;
    let build = |parity: usize| -> Result<DensityMatrix> {
        let w: Vec<f64> = (0..p.dim)
            .map(|n| if n % 2 == parity { nu2.powi((n / 2) as i32) } else { 0.0 })
            .collect();
        let kept: f64 = (1.0 - nu2) * w.iter().sum::<f64>();
        let total: f64 = w.iter().sum();
        let m = ComplexMatrix::from_real_diag(&w.iter().map(|x| x / total).collect::<Vec<_>>());
        Ok(DensityMatrix::new(space.clone(), m, &Tolerances::default())?.with_leakage(1.0 - kept))
    };
    Ok((build(0)?, build(1)?))
}

/// α|e0⟩⟨e0| + (1−α)|e1⟩⟨e1| + z|e0⟩⟨e1| + z̄|e1⟩⟨e0| for λ = 0.
pub fn two_photon_lambda0_invariants(alpha: f64, z: c64, p: &TwoPhotonParams) -> Result<DensityMatrix> {
    p.validate()?;
    if p.lambda != 0.0 {
        return Err(Error::invalid("lambda", "the two-level invariant family requires lambda = 0"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", "must lie in [0, 1]"));
    }
    let bound = alpha * (1.0 - alpha);
    if z.norm_sqr() > bound + 1e-12 {
        return Err(Error::NotPositive {
            min_eigenvalue: 0.5 - (0.25 - bound + z.norm_sqr()).sqrt(),
        });
    }
    let mut m = ComplexMatrix::zeros(p.dim, p.dim);
    m[(0, 0)] = cx(alpha, 0.0);
    m[(1, 1)] = cx(1.0 - alpha, 0.0);
    m[(0, 1)] = z;
    m[(1, 0)] = z.conj();
    DensityMatrix::new(p.space()?, m, &Tolerances::default())
}

/// Heisenberg fixed point for λ = 0 fixed by (A00, A01, A10, A11) through
/// A_jk = μ²√(c_j c_k) A_{j−2,k−2} / (μ²(c_j + c_k)/2 − iω(c_j − c_k)), c_n = n(n−1).
pub fn two_photon_fixed_point(seeds: [c64; 4], p: &TwoPhotonParams) -> Result<Operator> {
    p.validate()?;
    if p.lambda != 0.0 {
        return Err(Error::invalid("lambda", "the fixed-point recursion requires lambda = 0"));
    }
    let d = p.dim;
    let mu2 = p.mu * p.mu;
    let mut a = ComplexMatrix::zeros(d, d);
    a[(0, 0)] = seeds[0];
    a[(0, 1)] = seeds[1];
    a[(1, 0)] = seeds[2];
    a[(1, 1)] = seeds[3];
    for j in 2..d {
        for k in 2..d {
            let (cj, ck) = (falling2(j), falling2(k));
            let denom = cx(0.5 * mu2 * (cj + ck), -p.omega * (cj - ck));
            a[(j, k)] = a[(j - 2, k - 2)] * (mu2 * (cj * ck).sqrt()) / denom;
        }
    }
    Operator::new(p.space()?, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_schrodinger_generator;

    fn params(lambda: f64, omega: f64, dim: usize) -> TwoPhotonParams {
        TwoPhotonParams {
            lambda,
            mu: 1.0,
            omega,
            dim,
        }
    }

    #[test]
    fn validation() {
        assert!(params(1.0, 1.0, 10).validate().is_err());
        assert!(params(0.5, 1.0, 9).validate().is_err());
        assert!(params(0.5, 1.0, 6).validate().is_err());
        params(0.0, 1.0, 8).validate().unwrap();
    }

    #[test]
    fn jump_matrix_element() {
        let spec = build_two_photon(&params(0.0, 1.0, 10)).unwrap();
        assert_eq!(spec.jumps().len(), 1);
        for n in 2..10 {
            let v = spec.jumps()[0].matrix()[(n - 2, n)].re;
            assert!((v - ((n * (n - 1)) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn g_consistency_on_interior() {
        let p = TwoPhotonParams {
            lambda: 0.3,
            mu: 1.0,
            omega: 2.0,
            dim: 16,
        };
        assert!(two_photon_g_residual(&p).unwrap() < 1e-10);
    }

    #[test]
    fn reference_states_are_invariant_and_disjoint() {
        let p = params(0.5, 1.0, 24);
        let (re, ro) = two_photon_reference_states(&p).unwrap();
        let gen = build_schrodinger_generator(&build_two_photon(&p).unwrap()).unwrap();
        let bound = 5.0 * p.nu().powi(2 * (p.dim as i32 / 2 - 2));
        assert!(gen.apply(re.matrix()).norm_max() <= bound);
        assert!(gen.apply(ro.matrix()).norm_max() <= bound);
        assert!(re.matrix().matmul(ro.matrix()).trace().norm() < 1e-15);
        assert!((re.leakage() - 0.5f64.powi(24)).abs() < 1e-15);
    }

    #[test]
    fn lambda0_family() {
        let p = params(0.0, 2.0, 12);
        let gen = build_schrodinger_generator(&build_two_photon(&p).unwrap()).unwrap();
        let r = two_photon_lambda0_invariants(1.0, cx(0.0, 0.0), &p).unwrap();
        assert!(gen.apply(r.matrix()).norm_max() <= 1e-10);
        let r = two_photon_lambda0_invariants(0.5, cx(0.5, 0.0), &p).unwrap();
        assert!(gen.apply(r.matrix()).norm_max() <= 1e-10);
        assert!(matches!(
            two_photon_lambda0_invariants(0.5, cx(0.6, 0.0), &p),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn fixed_point_zero_seeds() {
        let p = params(0.0, 2.0, 12);
        let a = two_photon_fixed_point([cx(0., 0.); 4], &p).unwrap();
        assert_eq!(a.matrix().norm_max(), 0.0);
    }
}
