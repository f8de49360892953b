//! Recurrent/transient structure, enclosures, nested-face decomposition and GAS verdicts.

mod enclosures;
mod gas;
mod nfd;
mod recurrence;

pub use enclosures::{
    block_diagonal_limit, enclosure_defect, enclosure_defect_gkls, is_enclosure, is_enclosure_gkls,
    minimal_enclosures, BetaBlock, EnclosureDecomposition,
};
pub use gas::{is_gas, GASReason, GASVerdict};
pub use nfd::{nfd, NFDResult, NFDStage};
pub use recurrence::{
    absorption_operator, check_ergodic, default_t0_candidates, positive_recurrent_subspace,
    rate_certificate, transient_split, AbsorptionEstimate, ErgodicCheck, RateCertificate,
    RecurrentSplit,
};

use serde::Serialize;

/// Discrete time uses the channel at t0; continuous time uses the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum TimeMode {
    Discrete { t0: f64 },
    Continuous,
}

impl Default for TimeMode {
    fn default() -> Self {
        TimeMode::Discrete { t0: 1.0 }
    }
}
