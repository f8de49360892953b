//! Dense complex linear algebra with explicit tolerance contracts.

mod decomp;
mod expm;
mod matrix;

pub use decomp::{
    eigen_full, eigenvalues, generalized_eigenspace, hermitian_eigen, nullspace, nullspace_scaled, orthonormalize,
    range_basis, solve, spectral_abscissa, spectral_radius, EigenPair,
};
pub use expm::matrix_exponential;
pub use matrix::{vec_dot, vec_norm, ComplexMatrix};

pub use faer::c64;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every analysis.
///
/// Rank decisions are relative to the largest singular value; the remaining
/// fields are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub nullspace_rel: f64,
    pub psd_floor: f64,
    pub expm_rel: f64,
    pub convergence_abs: f64,
    /// Band around 0 in which a generator eigenvalue counts as zero (both |Re| and |Im|).
    pub zero_eigenvalue: f64,
    /// Band for peripheral classification: |Re λ| for generators, 1 − |μ| for channels.
    pub peripheral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            nullspace_rel: 1e-9,
            psd_floor: 1e-10,
            expm_rel: 1e-12,
            convergence_abs: 1e-8,
            zero_eigenvalue: 1e-9,
            peripheral: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("nullspace_rel", self.nullspace_rel),
            ("psd_floor", self.psd_floor),
            ("expm_rel", self.expm_rel),
            ("convergence_abs", self.convergence_abs),
            ("zero_eigenvalue", self.zero_eigenvalue),
            ("peripheral", self.peripheral),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.nullspace_rel >= 1.0 {
            return Err(Error::invalid("nullspace_rel", "must be < 1"));
        }
        Ok(())
    }
}

/// Shorthand for a complex number.
#[inline]
pub fn cx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerances_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_tolerances() {
        let t = Tolerances {
            nullspace_rel: 1.5,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let t = Tolerances {
            psd_floor: 0.0,
            ..Default::default()
        };
        assert!(t.validate().is_err());
    }
}
