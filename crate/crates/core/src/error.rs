use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad input: shapes, parameters, preconditions.
    Validation,
    /// A structural claim could not be certified numerically.
    Certification,
    /// A numerical kernel failed or produced inconsistent output.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {context} (expected {expected}, got {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {trace:.12} is not 1")]
    NotNormalized { trace: f64 },

    #[error("wrong superoperator kind: {0}")]
    WrongKind(&'static str),

    #[error("eigen-decomposition did not converge")]
    EigenFailure,

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("eigenpair residual {residual:.3e} exceeds bound {bound:.3e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error("generator has an empty invariant kernel; not a Markov generator")]
    EmptyKernel,

    #[error("subspace is not an enclosure (defect {defect:.3e})")]
    NotEnclosure { defect: f64 },

    #[error("certification failed for block {block}: {reason}")]
    Certification { block: usize, reason: String },

    #[error("GAS criteria disagree: contains R+ = {contains}, spectral criterion = {spectral} (sigma {sigma:.6e})")]
    CriteriaDisagreement {
        contains: bool,
        spectral: bool,
        sigma: f64,
    },

    #[error("nested-face stage {stage}: sigma did not decrease (previous {previous:.12e}, current {current:.12e}, gap {gap:.3e})")]
    NonDecreasingSigma {
        stage: usize,
        previous: f64,
        current: f64,
        gap: f64,
    },

    #[error("state is not block diagonal (off-block mass {mass:.3e})")]
    NotBlockDiagonal { mass: f64 },

    #[error("series diverges at horizon {horizon}")]
    DivergentSeries { horizon: usize },

    #[error("chain is reducible at level {level}")]
    ReducibleChain { level: usize },

    #[error("quantum/classical mismatch: max deviation {max_deviation:.3e}, off-diagonal mass {off_diagonal:.3e}")]
    ConsistencyMismatch { max_deviation: f64, off_diagonal: f64 },

    #[error("inconsistent numerics: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            NonSquare { .. }
            | NonFinite
            | DimensionMismatch { .. }
            | InvalidParameter { .. }
            | NotHermitian { .. }
            | NotPositive { .. }
            | NotNormalized { .. }
            | WrongKind(_)
            | NotEnclosure { .. }
            | NotBlockDiagonal { .. }
            | ReducibleChain { .. }
            | DivergentSeries { .. } => ErrorCategory::Validation,
            Certification { .. }
            | CriteriaDisagreement { .. }
            | NonDecreasingSigma { .. }
            | ConsistencyMismatch { .. } => ErrorCategory::Certification,
            EigenFailure | SvdFailure | EigenResidual { .. } | EmptyKernel | Inconsistent(_) => {
                ErrorCategory::Numerical
            }
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
