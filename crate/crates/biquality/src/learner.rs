//! Learner and classifier contracts that every algorithm composes over.

use nalgebra::DMatrix;

use crate::dataset::BiqualityDataset;
use crate::error::{Error, Result};

/// Probabilities are clamped to this floor and renormalized so downstream
/// ratios never divide by zero.
pub const PROBA_FLOOR: f64 = 1e-12;

/// An unfitted learner: immutable configuration that produces a fitted
/// [`Classifier`] from weighted data. Calling `fit` twice runs two
/// independent estimations, so a `Learner` doubles as its own factory.
pub trait Learner: Send + Sync {
    /// Fits on `x` (n × d), labels `y` in `0..n_classes` and per-sample
    /// weights `w` (one per row).
    fn fit(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        w: &[f64],
        n_classes: usize,
    ) -> Result<Box<dyn Classifier>>;

    /// Whether negative per-sample weights are accepted. Corrections that
    /// produce signed weights check this before fitting.
    fn supports_signed_weights(&self) -> bool {
        false
    }

    fn fit_unweighted(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        n_classes: usize,
    ) -> Result<Box<dyn Classifier>> {
        self.fit(x, y, &vec![1.0; x.nrows()], n_classes)
    }
}

/// A fitted probabilistic classifier. Fitted models are immutable and safe
/// to share across threads for prediction.
pub trait Classifier: Send + Sync {
    fn n_classes(&self) -> usize;

    /// Row-stochastic matrix (n × n_classes); every row sums to 1 and all
    /// entries are at least [`PROBA_FLOOR`].
    fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    /// Row argmax of `predict_proba`, ties broken by the lowest class index.
    fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_proba(x)?))
    }
}

/// An algorithm that trains a classifier from a biquality dataset.
pub trait BiqualityLearner: Send + Sync {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>>;
}

/// Per-row argmax with ties broken by the lowest column index.
pub fn argmax_rows(p: &DMatrix<f64>) -> Vec<usize> {
    (0..p.nrows())
        .map(|i| {
            let mut best = 0;
            let mut best_v = p[(i, 0)];
            for j in 1..p.ncols() {
                if p[(i, j)] > best_v {
                    best_v = p[(i, j)];
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Clamps entries to `[PROBA_FLOOR, 1]` and renormalizes each row to sum 1.
pub fn floor_and_normalize_rows(p: &mut DMatrix<f64>) {
    for i in 0..p.nrows() {
        let mut sum = 0.0;
        for j in 0..p.ncols() {
            let v = p[(i, j)].clamp(PROBA_FLOOR, 1.0);
            p[(i, j)] = v;
            sum += v;
        }
        for j in 0..p.ncols() {
            p[(i, j)] /= sum;
        }
    }
}

pub(crate) fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} samples",
            w.len(),
            n
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weights".into()));
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::AllZeroWeights);
    }
    Ok(())
}

/// Baseline: fit only on the trusted subset, ignoring untrusted samples.
pub struct TrustedOnly<L> {
    pub learner: L,
}

impl<L: Learner> BiqualityLearner for TrustedOnly<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        ds.require_trusted()?;
        let trusted = ds.trusted_indices();
        let sub = ds.subset(&trusted)?;
        self.learner
            .fit_unweighted(sub.features(), sub.labels(), ds.n_classes())
    }
}

/// Baseline: fit on everything with unit weights, as if all labels were clean.
pub struct NaiveAll<L> {
    pub learner: L,
}

impl<L: Learner> BiqualityLearner for NaiveAll<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        self.learner
            .fit_unweighted(ds.features(), ds.labels(), ds.n_classes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn argmax_breaks_ties_low() {
        let p = dmatrix![0.4, 0.4, 0.2; 0.1, 0.2, 0.7];
        assert_eq!(argmax_rows(&p), vec![0, 2]);
    }

    #[test]
    fn floor_keeps_rows_stochastic() {
        let mut p = dmatrix![1.0, 0.0; 0.5, 0.5];
        floor_and_normalize_rows(&mut p);
        for i in 0..2 {
            let sum: f64 = (0..2).map(|j| p[(i, j)]).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(p[(i, 0)] >= PROBA_FLOOR && p[(i, 1)] >= PROBA_FLOOR);
        }
    }

    #[test]
    fn zero_weights_rejected() {
        assert!(matches!(
            check_weights(&[0.0, 0.0], 2),
            Err(Error::AllZeroWeights)
        ));
    }
}
