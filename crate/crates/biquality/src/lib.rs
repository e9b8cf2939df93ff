//! Tools for training classifiers from a small trusted dataset plus a
//! large untrusted one.
//!
//! Every algorithm consumes a [`BiqualityDataset`]: features, labels, and a
//! per-sample `sample_quality` flag where 1 marks cleanly labeled,
//! representative samples and 0 marks samples whose labels or distribution
//! cannot be trusted. Three algorithm families are provided:
//!
//! - **transition-matrix corrections** ([`transition`]): estimate how labels
//!   were corrupted and undo it (Unhinged, Backward, IRLNL, Plugin, all
//!   combinable with GLC estimation);
//! - **importance reweighting** ([`reweight`]): weight untrusted samples so
//!   their distribution matches the trusted one (K-KMM, IRBL, K-PDR);
//! - **domain adaptation** ([`adapt`]): treat trusted/untrusted as
//!   target/source domains (EasyAdapt, TrAdaBoost).
//!
//! [`corruption`] simulates label noise, weak labels, imbalance, and
//! sampling bias to turn clean datasets into benchmark biquality datasets;
//! [`model_selection`] provides cross-validation that never scores on
//! untrusted labels; [`benchmark`] is a reproducible experiment harness with
//! a CLI front end (`biq`).
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability: start with `quickstart`.

pub mod adapt;
pub mod benchmark;
pub mod corruption;
pub mod dataset;
pub mod error;
pub mod kernel;
pub mod learner;
pub mod logistic;
pub mod model_selection;
pub mod reweight;
pub mod transition;

pub use dataset::{validate_dataset, BiqualityDataset, DatasetSummary};
pub use error::{Error, Result};
pub use kernel::Kernel;
pub use learner::{
    argmax_rows, BiqualityLearner, Classifier, Learner, NaiveAll, TrustedOnly, PROBA_FLOOR,
};
pub use logistic::{LogisticModel, LogisticRegression};
pub use transition::TransitionMatrix;
