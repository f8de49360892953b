//! Builders and closed-form references for the three reference models.

mod generic;
mod k_photon;
mod two_photon;

pub use generic::{build_generic_qms, diagonal_block_defect, Boundary, GenericQMS, GenericQMSParams};
pub use k_photon::{build_k_photon, lyapunov_series, lyapunov_value, KPhoton, KPhotonParams};
pub use two_photon::{
    build_two_photon, two_photon_fixed_point, two_photon_g_residual, two_photon_generator_pair,
    two_photon_lambda0_invariants, two_photon_reference_states, TwoPhotonParams,
};

use crate::numerics::{c64, cx, ComplexMatrix};

/// Top-left d×d corner of a^k.
pub(crate) fn lowering_power(d: usize, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if j == i + k {
            let v: f64 = (i + 1..=j).map(|m| m as f64).product();
            cx(v.sqrt(), 0.0)
        } else {
            cx(0.0, 0.0)
        }
    })
}

/// n(n−1)
pub(crate) fn falling2(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64
}

pub(crate) fn real_diag(values: impl Iterator<Item = f64>) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&values.collect::<Vec<_>>())
}

#[allow(dead_code)]
pub(crate) fn zero() -> c64 {
    cx(0.0, 0.0)
}
