use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{compress_superoperator, Picture, Superoperator};
use crate::numerics::{spectral_abscissa, spectral_radius, Tolerances};
use crate::operators::Subspace;
use crate::semigroup::channel;

use super::enclosures::{enclosure_defect, is_enclosure};
use super::recurrence::positive_recurrent_subspace;
use super::TimeMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GASReason {
    ContainsRPlus,
    SpectralRadiusBelowOne,
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct GASVerdict {
    pub is_gas: bool,
    pub reason: GASReason,
    /// Spectral radius (discrete) or abscissa (continuous) of the map compressed to V⊥.
    pub sigma_r1: f64,
    pub contains_r_plus: bool,
    pub spectral_below: bool,
}

/// GAS test for an enclosure V: V ⊇ R+, cross-checked against the spectrum on V⊥.
pub fn is_gas(
    gen: &Superoperator,
    v: &Subspace,
    mode: TimeMode,
    tol: &Tolerances,
) -> Result<GASVerdict> {
    gen.require_generator()?;
    let schr = gen.in_picture(Picture::Schrodinger);
    if !is_enclosure(&schr, v)? {
        return Err(Error::NotEnclosure { defect: enclosure_defect(&schr, v) });
    }
    let r_plus = positive_recurrent_subspace(&schr, tol)?;
    let contains_r_plus = v.contains(&r_plus)?;
    let complement = v.complement()?;
    let (sigma_r1, spectral_below) = match mode {
        TimeMode::Discrete { t0 } => {
            let sigma = if complement.is_zero() {
                0.0
            } else {
                let c = compress_superoperator(channel(&schr, t0)?.matrix(), complement.basis());
                spectral_radius(&c)?
            };
            (sigma, sigma < 1.0 - tol.peripheral)
        }
        TimeMode::Continuous => {
            let sigma = if complement.is_zero() {
                f64::NEG_INFINITY
            } else {
                let c = compress_superoperator(schr.matrix(), complement.basis());
                spectral_abscissa(&c)?
            };
            (sigma, sigma < -tol.peripheral)
        }
    };
    if contains_r_plus != spectral_below {
        return Err(Error::CriteriaDisagreement {
            contains: contains_r_plus,
            spectral: spectral_below,
            sigma: sigma_r1,
        });
    }
    let reason = if contains_r_plus {
        GASReason::ContainsRPlus
    } else {
        GASReason::Neither
    };
    Ok(GASVerdict { is_gas: contains_r_plus, reason, sigma_r1, contains_r_plus, spectral_below })
}
