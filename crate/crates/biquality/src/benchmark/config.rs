//! Declarative benchmark configuration (TOML), resolution of defaults,
//! and the resolved-config hash that ties result rows to one run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::registry::ALGORITHM_NAMES;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub corruption: CorruptionConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: String,
    pub label_column: String,
    /// Column holding 0/1 trust flags. Mutually exclusive with
    /// `trusted_fraction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_column: Option<String>,
    /// Fraction of samples kept trusted by a seeded stratified split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trusted_fraction: Option<f64>,
}

/// Corruption applied to the untrusted part of the assembled dataset
/// (`weak_labels` instead drives the trusted/untrusted split itself).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorruptionConfig {
    #[default]
    None,
    /// Class-conditional label noise from a full matrix or a uniform
    /// off-diagonal ratio.
    LabelNoise {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise_ratio: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// Constant per-sample flip probability; replacement class drawn from
    /// the (off-diagonal-renormalized) matrix, uniform when omitted.
    InstanceDependentLabelNoise {
        flip_probability: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// Per-sample flip probabilities proportional to the uncertainty of a
    /// classifier trained on the clean data, calibrated to `target_ratio`.
    UncertaintyNoise {
        target_ratio: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// Random-linear-map noise with a truncated-normal budget.
    FeatureDependentLabelNoise { noise_ratio: f64 },
    /// Relabel the untrusted part with predictions of a model fitted on the
    /// trusted fraction (requires `dataset.trusted_fraction`).
    WeakLabels,
    /// Resample the untrusted part to a target class distribution.
    Imbalance {
        target_distribution: Vec<f64>,
        mode: String,
    },
    /// Keep a biased subset of the untrusted part, selected along the first
    /// principal component.
    SamplingBias {
        shift: f64,
        scale: f64,
        keep_fraction: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coef0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_negative: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permissive: Option<bool>,
}

impl AlgorithmConfig {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kernel: None,
            gamma: None,
            degree: None,
            coef0: None,
            reg: None,
            l2_penalty: None,
            max_iter: None,
            box_bound: None,
            mean_slack: None,
            w_max: None,
            n_iter: None,
            clip_negative: None,
            permissive: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub cv_folds: usize,
}

impl BenchmarkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Validates the config and fills every defaultable field, so two
    /// configs that resolve identically hash identically.
    pub fn resolve(mut self) -> Result<Self> {
        match (&self.dataset.quality_column, self.dataset.trusted_fraction) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::InvalidConfig(
                    "exactly one of dataset.quality_column and dataset.trusted_fraction must be set"
                        .into(),
                ));
            }
            (None, Some(f)) if !(0.0 < f && f < 1.0) => {
                return Err(Error::InvalidConfig(format!(
                    "trusted_fraction must lie in (0, 1), got {f}"
                )));
            }
            _ => {}
        }
        self.validate_corruption()?;
        if self.run.seeds.is_empty() {
            return Err(Error::InvalidConfig("run.seeds must be non-empty".into()));
        }
        if self.run.cv_folds < 2 {
            return Err(Error::InvalidConfig("run.cv_folds must be at least 2".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one algorithm must be configured".into(),
            ));
        }
        for algo in &mut self.algorithms {
            resolve_algorithm(algo)?;
        }
        Ok(self)
    }

    fn validate_corruption(&self) -> Result<()> {
        let check_matrix = |matrix: &Option<Vec<Vec<f64>>>| -> Result<()> {
            if let Some(rows) = matrix {
                crate::transition::TransitionMatrix::from_rows(rows)?;
            }
            Ok(())
        };
        match &self.corruption {
            CorruptionConfig::None | CorruptionConfig::FeatureDependentLabelNoise { .. } => {}
            CorruptionConfig::LabelNoise {
                noise_ratio,
                matrix,
            } => {
                match (noise_ratio, matrix) {
                    (None, None) | (Some(_), Some(_)) => {
                        return Err(Error::InvalidConfig(
                            "label_noise needs exactly one of noise_ratio and matrix".into(),
                        ))
                    }
                    _ => {}
                }
                check_matrix(matrix)?;
            }
            CorruptionConfig::InstanceDependentLabelNoise {
                flip_probability,
                matrix,
            } => {
                if !(0.0..=1.0).contains(flip_probability) {
                    return Err(Error::InvalidConfig(
                        "flip_probability must lie in [0, 1]".into(),
                    ));
                }
                check_matrix(matrix)?;
            }
            CorruptionConfig::UncertaintyNoise {
                target_ratio,
                matrix,
            } => {
                if !(0.0..1.0).contains(target_ratio) {
                    return Err(Error::InvalidConfig(
                        "target_ratio must lie in [0, 1)".into(),
                    ));
                }
                check_matrix(matrix)?;
            }
            CorruptionConfig::WeakLabels => {
                if self.dataset.trusted_fraction.is_none() {
                    return Err(Error::InvalidConfig(
                        "weak_labels corruption requires dataset.trusted_fraction".into(),
                    ));
                }
            }
            CorruptionConfig::Imbalance {
                target_distribution,
                mode,
            } => {
                crate::corruption::ImbalanceMode::parse(mode)?;
                if (target_distribution.iter().sum::<f64>() - 1.0).abs() > 1e-9
                    || target_distribution.iter().any(|&p| !(0.0..=1.0).contains(&p))
                {
                    return Err(Error::InvalidConfig(
                        "target_distribution must be a simplex".into(),
                    ));
                }
            }
            CorruptionConfig::SamplingBias {
                scale,
                keep_fraction,
                ..
            } => {
                if !(*scale > 0.0) {
                    return Err(Error::InvalidConfig("scale must be positive".into()));
                }
                if !(0.0 < *keep_fraction && *keep_fraction <= 1.0) {
                    return Err(Error::InvalidConfig(
                        "keep_fraction must lie in (0, 1]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding of the resolved config.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }
}

/// Fills the defaults for the fields each algorithm consumes; fields that
/// do not apply stay unset so the resolved config documents what matters.
fn resolve_algorithm(algo: &mut AlgorithmConfig) -> Result<()> {
    if !ALGORITHM_NAMES.contains(&algo.name.as_str()) {
        return Err(Error::UnknownAlgorithm(algo.name.clone()));
    }
    // Every algorithm composes over the built-in logistic learner.
    algo.l2_penalty.get_or_insert(1e-4);
    algo.max_iter.get_or_insert(500);
    match algo.name.as_str() {
        "unhinged" => {
            algo.kernel.get_or_insert_with(|| "linear".into());
            algo.reg.get_or_insert(1.0);
        }
        "kkmm" => {
            algo.kernel.get_or_insert_with(|| "rbf".into());
            algo.box_bound.get_or_insert(1000.0);
            algo.permissive.get_or_insert(false);
        }
        "irlnl" | "irbl" | "kpdr" => {
            algo.w_max.get_or_insert(1000.0);
        }
        "backward" => {
            algo.clip_negative.get_or_insert(false);
        }
        "tradaboost" => {
            algo.n_iter.get_or_insert(10);
        }
        _ => {}
    }
    if let Some(kernel) = &algo.kernel {
        crate::kernel::Kernel::parse(kernel)?;
        if kernel == "polynomial" {
            algo.degree.get_or_insert(3);
            algo.coef0.get_or_insert(1.0);
        }
    }
    if let Some(g) = algo.gamma {
        if !(g > 0.0) {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[dataset]
path = "data.csv"
label_column = "label"
trusted_fraction = 0.1

[[algorithms]]
name = "irbl"

[run]
seeds = [1, 2]
cv_folds = 3
"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = BenchmarkConfig::from_toml_str(MINIMAL)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(cfg.algorithms[0].w_max, Some(1000.0));
        assert_eq!(cfg.algorithms[0].l2_penalty, Some(1e-4));
        assert!(matches!(cfg.corruption, CorruptionConfig::None));
    }

    #[test]
    fn unknown_algorithm_rejected_before_running() {
        let text = MINIMAL.replace("irbl", "gradient_surgery");
        let err = BenchmarkConfig::from_toml_str(&text)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(err, Error::UnknownAlgorithm(_)));
    }

    #[test]
    fn quality_column_and_fraction_are_mutually_exclusive() {
        let text = MINIMAL.replace(
            "trusted_fraction = 0.1",
            "trusted_fraction = 0.1\nquality_column = \"q\"",
        );
        assert!(BenchmarkConfig::from_toml_str(&text)
            .unwrap()
            .resolve()
            .is_err());
    }

    #[test]
    fn identical_resolution_hashes_identically() {
        let a = BenchmarkConfig::from_toml_str(MINIMAL)
            .unwrap()
            .resolve()
            .unwrap();
        // Spelling out a default must not change the hash after resolution.
        let text = MINIMAL.replace("name = \"irbl\"", "name = \"irbl\"\nw_max = 1000.0");
        let b = BenchmarkConfig::from_toml_str(&text)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn corruption_union_parses() {
        let text = MINIMAL.to_string()
            + r#"
[corruption]
kind = "label_noise"
noise_ratio = 0.3
"#;
        let cfg = BenchmarkConfig::from_toml_str(&text)
            .unwrap()
            .resolve()
            .unwrap();
        assert!(matches!(
            cfg.corruption,
            CorruptionConfig::LabelNoise {
                noise_ratio: Some(_),
                matrix: None
            }
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.to_string() + "\n[dataset.extras]\nfoo = 1\n";
        assert!(BenchmarkConfig::from_toml_str(&text).is_err());
    }
}
