use crate::error::{Error, Result};
use crate::lindblad::{compress_superoperator, Picture, SuperKind, Superoperator};
use crate::numerics::{
    cx, generalized_eigenspace, spectral_abscissa, spectral_radius, ComplexMatrix,
    Tolerances,
};
use crate::operators::{support_projection, Operator, Subspace};

use super::enclosures::{enclosure_defect, is_enclosure};

#[derive(Debug, Clone)]
pub struct NFDStage {
    /// H_{T_i}, the new face added at this stage.
    pub subspace_t: Subspace,
    /// σ(T_{R_i}) with R_i the complement of the subspace entering the stage.
    pub sigma: f64,
    /// H_{S_{i+1}}.
    pub cumulative_s: Subspace,
}

#[derive(Debug, Clone)]
pub struct NFDResult {
    pub seed: Subspace,
    pub stages: Vec<NFDStage>,
    /// First i whose entering subspace (the seed for i = 0) is GAS; `stages.len()` when only
    /// the full space is.
    pub gas_stage: usize,
    pub continuous: bool,
}

impl NFDResult {
    /// Subspace entering stage i; index `stages.len()` is the full space.
    pub fn entering(&self, i: usize) -> &Subspace {
        if i == 0 {
            &self.seed
        } else {
            &self.stages[i - 1].cumulative_s
        }
    }
}

/// Nested-face decomposition from an invariant seed. A channel is treated in discrete time
/// (spectral radius, eigenvalue 1), a generator in continuous time (spectral abscissa,
/// eigenvalue 0).
pub fn nfd(map: &Superoperator, seed: &Subspace, tol: &Tolerances) -> Result<NFDResult> {
    map.space().check_same(seed.space())?;
    let schr = map.in_picture(Picture::Schrodinger);
    let continuous = matches!(schr.kind(), SuperKind::Generator);
    if !is_enclosure(&schr, seed)? {
        return Err(Error::NotEnclosure { defect: enclosure_defect(&schr, seed) });
    }
    let threshold = if continuous { -tol.peripheral } else { 1.0 - tol.peripheral };
    let space = schr.space();
    let mut s = seed.clone();
    let mut stages: Vec<NFDStage> = Vec::new();
    while !s.is_full() {
        let r = s.complement()?;
        let q = r.basis();
        let dr = r.dim();
        let t_r = compress_superoperator(schr.matrix(), q);
        let mut sigma = if continuous { spectral_abscissa(&t_r)? } else { spectral_radius(&t_r)? };
        // A discrete map whose remaining spectrum sits at round-off level is nilpotent for
        // all numerical purposes: the rest of the space is the last face.
        let nilpotent = !continuous && sigma <= 1e-12 * schr.matrix().norm_spectral().max(1.0);
        if nilpotent {
            sigma = 0.0;
        }
        if let Some(prev) = stages.last() {
            if !(sigma < prev.sigma - 1e-12 * prev.sigma.abs().max(1.0)) {
                return Err(Error::NonDecreasingSigma {
                    stage: stages.len(),
                    previous: prev.sigma,
                    current: sigma,
                    gap: prev.sigma - sigma,
                });
            }
        }
        if nilpotent {
            stages.push(NFDStage { subspace_t: r, sigma, cumulative_s: Subspace::full(space) });
            break;
        }
        let gen_space = generalized_eigenspace(&t_r, cx(sigma, 0.0), dr * dr, tol)?;
        let mut acc = ComplexMatrix::zeros(dr, dr);
        for k in 0..gen_space.ncols() {
            let x = ComplexMatrix::unvectorize(&gen_space.column(k), dr);
            let xd = x.adjoint();
            acc += &x.matmul(&xd);
            acc += &xd.matmul(&x);
        }
        let lifted = r.lift(&acc).hermitian_part();
        let t = support_projection(&Operator::new(space.clone(), lifted)?, tol)?;
        if t.is_zero() {
            return Err(Error::Inconsistent(format!(
                "empty generalized eigenspace at sigma = {sigma} in stage {}",
                stages.len()
            )));
        }
        let next = s.sum(&t, tol)?;
        if next.dim() <= s.dim() {
            return Err(Error::Inconsistent(format!(
                "stage {} did not enlarge the cumulative subspace",
                stages.len()
            )));
        }
        stages.push(NFDStage { subspace_t: t, sigma, cumulative_s: next.clone() });
        s = next;
    }
    let gas_stage = stages.iter().position(|st| st.sigma < threshold).unwrap_or(stages.len());
    Ok(NFDResult { seed: seed.clone(), stages, gas_stage, continuous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_schrodinger_generator;
    use crate::models::{build_two_photon, TwoPhotonParams};
    use crate::semigroup::channel;

    fn lambda_zero() -> Superoperator {
        let p = TwoPhotonParams { lambda: 0.0, mu: 1.0, omega: 2.0, dim: 12 };
        build_schrodinger_generator(&build_two_photon(&p).unwrap()).unwrap()
    }

    #[test]
    fn seed_r_plus_is_gas_at_once() {
        let gen = lambda_zero();
        let tol = Tolerances::default();
        let seed = Subspace::coordinate(gen.space(), &[0, 1]).unwrap();
        let res = nfd(&channel(&gen, 1.0).unwrap(), &seed, &tol).unwrap();
        assert_eq!(res.gas_stage, 0);
        assert!(res.stages[0].sigma < 1.0);
        assert!(res.stages.last().unwrap().cumulative_s.is_full());
    }

    #[test]
    fn partial_seed_picks_up_the_other_recurrent_level() {
        let gen = lambda_zero();
        let tol = Tolerances::default();
        let seed = Subspace::coordinate(gen.space(), &[0]).unwrap();
        for map in [channel(&gen, 1.0).unwrap(), gen.clone()] {
            let res = nfd(&map, &seed, &tol).unwrap();
            let first = &res.stages[0];
            let target = if res.continuous { 0.0 } else { 1.0 };
            assert!((first.sigma - target).abs() < 1e-9);
            assert_eq!(first.subspace_t.coordinate_indices(), Some(vec![1]));
            assert_eq!(res.gas_stage, 1);
            assert!(res.stages.windows(2).all(|w| w[1].sigma < w[0].sigma));
        }
    }

    #[test]
    fn full_seed_has_no_stages() {
        let gen = lambda_zero();
        let res = nfd(&gen, &Subspace::full(gen.space()), &Tolerances::default()).unwrap();
        assert!(res.stages.is_empty());
        assert_eq!(res.gas_stage, 0);
    }

    #[test]
    fn non_invariant_seed_is_rejected() {
        let gen = lambda_zero();
        let seed = Subspace::coordinate(gen.space(), &[2]).unwrap();
        assert!(matches!(
            nfd(&gen, &seed, &Tolerances::default()),
            Err(Error::NotEnclosure { .. })
        ));
    }
}
