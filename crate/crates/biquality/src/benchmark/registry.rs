//! Maps configured algorithm names to runnable biquality learners.

use crate::adapt::{EasyAdapt, TrAdaBoost};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::learner::{BiqualityLearner, NaiveAll, TrustedOnly};
use crate::logistic::LogisticRegression;
use crate::reweight::{Irbl, Kkmm, Kpdr};
use crate::transition::{CorrectionMode, GlcCorrection, Unhinged};

use super::config::AlgorithmConfig;

/// The nine biquality algorithms plus the two reference baselines.
pub const ALGORITHM_NAMES: &[&str] = &[
    "backward",
    "easy_adapt",
    "irbl",
    "irlnl",
    "kkmm",
    "kpdr",
    "naive_all",
    "plugin",
    "tradaboost",
    "trusted_only",
    "unhinged",
];

/// Builds the learner for one algorithm entry. Hyperparameters that do not
/// apply to the named algorithm are ignored.
pub fn build_algorithm(cfg: &AlgorithmConfig) -> Result<Box<dyn BiqualityLearner>> {
    let base = base_learner(cfg);
    let learner: Box<dyn BiqualityLearner> = match cfg.name.as_str() {
        "trusted_only" => Box::new(TrustedOnly { learner: base }),
        "naive_all" => Box::new(NaiveAll { learner: base }),
        "unhinged" => Box::new(
            Unhinged::with_kernel(kernel_from(cfg, "linear")?).with_reg(cfg.reg.unwrap_or(1.0)),
        ),
        "backward" => {
            let mut glc = GlcCorrection::new(CorrectionMode::Backward, base);
            glc.clip_negative = cfg.clip_negative.unwrap_or(false);
            Box::new(glc)
        }
        "irlnl" => {
            let mut glc = GlcCorrection::new(CorrectionMode::Irlnl, base);
            glc.w_max = cfg.w_max.unwrap_or(1000.0);
            Box::new(glc)
        }
        "plugin" => Box::new(GlcCorrection::new(CorrectionMode::Plugin, base)),
        "kkmm" => Box::new(Kkmm {
            kernel: kernel_from(cfg, "rbf")?,
            base,
            box_bound: cfg.box_bound.unwrap_or(1000.0),
            mean_slack: cfg.mean_slack,
            permissive: cfg.permissive.unwrap_or(false),
        }),
        "irbl" => {
            let mut irbl = Irbl::new(base);
            irbl.w_max = cfg.w_max.unwrap_or(1000.0);
            Box::new(irbl)
        }
        "kpdr" => {
            let mut kpdr = Kpdr::new(base);
            kpdr.w_max = cfg.w_max.unwrap_or(1000.0);
            Box::new(kpdr)
        }
        "easy_adapt" => Box::new(EasyAdapt::new(base)),
        "tradaboost" => Box::new(TrAdaBoost::new(base, cfg.n_iter.unwrap_or(10))),
        other => return Err(Error::UnknownAlgorithm(other.to_string())),
    };
    Ok(learner)
}

fn base_learner(cfg: &AlgorithmConfig) -> LogisticRegression {
    let mut lr = LogisticRegression::default();
    if let Some(l2) = cfg.l2_penalty {
        lr.l2_penalty = l2;
    }
    if let Some(max_iter) = cfg.max_iter {
        lr.max_iter = max_iter;
    }
    lr
}

fn kernel_from(cfg: &AlgorithmConfig, default: &str) -> Result<Kernel> {
    let name = cfg.kernel.as_deref().unwrap_or(default);
    let kernel = match Kernel::parse(name)? {
        Kernel::Rbf { .. } => Kernel::Rbf { gamma: cfg.gamma },
        Kernel::Linear => Kernel::Linear,
        Kernel::Polynomial { .. } => Kernel::Polynomial {
            gamma: cfg.gamma,
            degree: cfg.degree.unwrap_or(3),
            coef0: cfg.coef0.unwrap_or(1.0),
        },
    };
    Ok(kernel)
}
