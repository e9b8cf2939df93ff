//! Biquality-aware cross-validation: untrusted samples never land in a
//! test set, so supervised metrics are only ever computed on trusted labels.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learner::{Classifier, PROBA_FLOOR};

/// One post-processed split: the test side holds only trusted indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiqualitySplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Output of [`make_biquality_cv`]; splits whose test set would be empty
/// after post-processing are dropped and counted.
#[derive(Debug, Clone)]
pub struct BiqualityCv {
    pub splits: Vec<BiqualitySplit>,
    pub dropped_splits: usize,
}

/// Post-processes base (train, test) index splits: untrusted indices found
/// in a test set are moved into the train set, so every sample keeps being
/// used while tests stay trusted-only.
pub fn make_biquality_cv(
    base_splits: &[(Vec<usize>, Vec<usize>)],
    sample_quality: &[u8],
) -> Result<BiqualityCv> {
    let n = sample_quality.len();
    for &q in sample_quality {
        if q > 1 {
            return Err(Error::InvalidQuality(q.to_string()));
        }
    }
    let mut splits = Vec::new();
    let mut dropped = 0;
    for (base_train, base_test) in base_splits {
        for &i in base_train.iter().chain(base_test) {
            if i >= n {
                return Err(Error::DimensionMismatch(format!(
                    "split index {i} out of bounds for {n} samples"
                )));
            }
        }
        let mut train = base_train.clone();
        let mut test = Vec::with_capacity(base_test.len());
        for &i in base_test {
            if sample_quality[i] == 1 {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        if test.is_empty() {
            dropped += 1;
            continue;
        }
        splits.push(BiqualitySplit { train, test });
    }
    Ok(BiqualityCv {
        splits,
        dropped_splits: dropped,
    })
}

/// Seeded shuffled k-fold over `n` samples. Fold sizes differ by at most
/// one; every index appears in exactly one test set.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::InvalidParameter("k-fold needs k >= 2".into()));
    }
    if k > n {
        return Err(Error::NotEnoughSamples {
            requested: k,
            available: n,
        });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut splits = Vec::with_capacity(k);
    let base = n / k;
    let extra = n % k;
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let test: Vec<usize> = indices[start..start + size].to_vec();
        let train: Vec<usize> = indices[..start]
            .iter()
            .chain(&indices[start + size..])
            .copied()
            .collect();
        splits.push((train, test));
        start += size;
    }
    Ok(splits)
}

/// Metrics over a trusted test set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    /// Unweighted mean of per-class recalls over classes present in the
    /// test set.
    pub balanced_accuracy: f64,
    /// Mean negative log-likelihood with probabilities floored at 1e-12.
    pub log_loss: f64,
    pub n_test: usize,
}

/// Scores a fitted model on trusted test indices. Passing any untrusted
/// index is a hard error, not a warning.
pub fn evaluate(
    model: &dyn Classifier,
    features: &DMatrix<f64>,
    labels: &[usize],
    sample_quality: &[u8],
    test_indices: &[usize],
) -> Result<MetricReport> {
    if test_indices.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let n = labels.len();
    for &i in test_indices {
        if i >= n {
            return Err(Error::DimensionMismatch(format!(
                "test index {i} out of bounds for {n} samples"
            )));
        }
        if sample_quality[i] != 1 {
            return Err(Error::UntrustedTestIndex { index: i });
        }
    }

    let x_test = features.select_rows(test_indices.iter());
    let probs = model.predict_proba(&x_test)?;
    let preds = crate::learner::argmax_rows(&probs);
    let k = probs.ncols();

    let mut correct = 0usize;
    let mut log_loss = 0.0;
    let mut per_class_total = vec![0usize; k];
    let mut per_class_correct = vec![0usize; k];
    for (row, &i) in test_indices.iter().enumerate() {
        let y = labels[i];
        if y >= k {
            return Err(Error::LabelOutOfRange {
                label: y,
                n_classes: k,
            });
        }
        per_class_total[y] += 1;
        if preds[row] == y {
            correct += 1;
            per_class_correct[y] += 1;
        }
        log_loss -= probs[(row, y)].max(PROBA_FLOOR).ln();
    }

    let n_test = test_indices.len();
    let recalls: Vec<f64> = (0..k)
        .filter(|&c| per_class_total[c] > 0)
        .map(|c| per_class_correct[c] as f64 / per_class_total[c] as f64)
        .collect();
    Ok(MetricReport {
        accuracy: correct as f64 / n_test as f64,
        balanced_accuracy: recalls.iter().sum::<f64>() / recalls.len() as f64,
        log_loss: log_loss / n_test as f64,
        n_test,
    })
}
