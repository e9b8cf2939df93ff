//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample_quality must be 0 or 1 (found {0})")]
    InvalidQuality(String),

    #[error("label out of range: {label} with {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("trusted subset is empty")]
    EmptyTrustedSet,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{0}")]
    SingleClass(String),

    #[error("all sample weights are zero")]
    AllZeroWeights,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not row-stochastic: {0}")]
    NotRowStochastic(String),

    #[error("transition matrix is singular")]
    SingularMatrix,

    #[error("transition matrix is ill-conditioned (cond {cond:.3e} >= {limit:.1e})")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("class {class} has no trusted samples")]
    ClassMissingFromTrusted { class: usize },

    #[error("base learner does not support signed weights (enable clip_negative or use another learner)")]
    SignedWeightsUnsupported,

    #[error("gram matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("calibration target unreachable: {0}")]
    TargetUnreachable(String),

    #[error("noise matrix row {class} has zero off-diagonal mass but flip probability is positive")]
    ZeroOffDiagonalMass { class: usize },

    #[error("requested {requested} samples but only {available} are available")]
    NotEnoughSamples { requested: usize, available: usize },

    #[error("test index {index} refers to an untrusted sample")]
    UntrustedTestIndex { index: usize },

    #[error("test index set is empty")]
    EmptyTestSet,

    #[error("weak learner error rate {error_rate:.4} >= 0.5 on trusted samples at iteration 1")]
    WeakLearnerTooWeak { error_rate: f64 },

    #[error("column not found: {0}")]
    ColumnNotFound(String),

    #[error("non-numeric value {value:?} in column {column} at data row {row}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("unknown algorithm {0:?} (see registry for valid names)")]
    UnknownAlgorithm(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("result rows carry mixed config_hash values")]
    MixedConfigHash,

    #[error("model has not been fitted")]
    NotFitted,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
