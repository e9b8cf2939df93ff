//! Domain-adaptation baselines that treat trusted/untrusted as
//! target/source domains: EasyAdapt feature augmentation and TrAdaBoost
//! instance-transfer boosting.

use nalgebra::DMatrix;

use crate::dataset::BiqualityDataset;
use crate::error::{Error, Result};
use crate::learner::{floor_and_normalize_rows, BiqualityLearner, Classifier, Learner};

/// EasyAdapt augmentation: each row is tripled to
/// `[shared copy | trusted-only copy | untrusted-only copy]`, so a trusted
/// sample maps to `(x, x, 0)` and an untrusted one to `(x, 0, x)`.
pub fn easy_adapt_transform(features: &DMatrix<f64>, quality: &[u8]) -> Result<DMatrix<f64>> {
    let (n, d) = (features.nrows(), features.ncols());
    if quality.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} quality flags for {} rows",
            quality.len(),
            n
        )));
    }
    let mut out = DMatrix::zeros(n, 3 * d);
    for i in 0..n {
        let domain_block = if quality[i] == 1 { d } else { 2 * d };
        for c in 0..d {
            out[(i, c)] = features[(i, c)];
            out[(i, domain_block + c)] = features[(i, c)];
        }
    }
    Ok(out)
}

/// Trusted-style augmentation `(x, x, 0)` used at prediction time, since the
/// deployment target is the trusted distribution.
pub fn easy_adapt_trusted_view(features: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = (features.nrows(), features.ncols());
    let mut out = DMatrix::zeros(n, 3 * d);
    for i in 0..n {
        for c in 0..d {
            out[(i, c)] = features[(i, c)];
            out[(i, d + c)] = features[(i, c)];
        }
    }
    out
}

/// EasyAdapt: fit any learner on the 3d augmentation.
pub struct EasyAdapt<L> {
    pub learner: L,
}

impl<L> EasyAdapt<L> {
    pub fn new(learner: L) -> Self {
        Self { learner }
    }
}

impl<L: Learner> BiqualityLearner for EasyAdapt<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        ds.require_trusted()?;
        let augmented = easy_adapt_transform(ds.features(), ds.sample_quality())?;
        let model = self.learner.fit_unweighted(&augmented, ds.labels(), ds.n_classes())?;
        Ok(Box::new(EasyAdaptModel { model }))
    }
}

pub struct EasyAdaptModel {
    model: Box<dyn Classifier>,
}

impl Classifier for EasyAdaptModel {
    fn n_classes(&self) -> usize {
        self.model.n_classes()
    }

    fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.model.predict_proba(&easy_adapt_trusted_view(x))
    }
}

/// Fixed untrusted down-weighting factor `1 / (1 + sqrt(2 ln(n_u) / N))`.
pub fn tradaboost_source_beta(n_untrusted: usize, n_iter: usize) -> f64 {
    if n_untrusted == 0 {
        return 1.0;
    }
    1.0 / (1.0 + (2.0 * (n_untrusted as f64).ln() / n_iter as f64).sqrt())
}

/// TrAdaBoost: boosting where trusted errors drive the usual exponential
/// upweighting while misclassified untrusted samples decay by a fixed
/// source factor.
pub struct TrAdaBoost<L> {
    pub weak: L,
    pub n_iter: usize,
}

impl<L> TrAdaBoost<L> {
    pub fn new(weak: L, n_iter: usize) -> Self {
        Self { weak, n_iter }
    }
}

impl<L: Learner> TrAdaBoost<L> {
    pub fn fit(&self, ds: &BiqualityDataset) -> Result<TrAdaBoostModel> {
        if self.n_iter < 2 {
            return Err(Error::InvalidParameter(
                "tradaboost needs n_iter >= 2".into(),
            ));
        }
        ds.require_trusted()?;
        let n = ds.n_samples();
        let source_beta = tradaboost_source_beta(ds.n_untrusted(), self.n_iter);
        let mut weights = vec![1.0 / n as f64; n];
        let mut learners: Vec<Box<dyn Classifier>> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();

        for iteration in 1..=self.n_iter {
            let model = self
                .weak
                .fit(ds.features(), ds.labels(), &weights, ds.n_classes())?;
            let preds = model.predict(ds.features())?;

            let mut trusted_mass = 0.0;
            let mut trusted_err = 0.0;
            for i in 0..n {
                if ds.sample_quality()[i] == 1 {
                    trusted_mass += weights[i];
                    if preds[i] != ds.labels()[i] {
                        trusted_err += weights[i];
                    }
                }
            }
            let e_t = trusted_err / trusted_mass;

            if e_t == 0.0 {
                // Perfect on trusted data: keep this learner and stop.
                learners.push(model);
                betas.push(1e-10);
                break;
            }
            if e_t >= 0.5 {
                if iteration == 1 {
                    return Err(Error::WeakLearnerTooWeak { error_rate: e_t });
                }
                break; // worse than chance: discard and stop
            }

            let beta_t = e_t / (1.0 - e_t);
            learners.push(model);
            betas.push(beta_t);

            // Misclassified trusted samples are upweighted, misclassified
            // untrusted samples decay by the source factor.
            #[cfg(debug_assertions)]
            let before = weights.clone();
            for i in 0..n {
                if preds[i] != ds.labels()[i] {
                    if ds.sample_quality()[i] == 1 {
                        weights[i] /= beta_t;
                    } else {
                        weights[i] *= source_beta;
                    }
                }
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            #[cfg(debug_assertions)]
            {
                let sum: f64 = weights.iter().sum();
                debug_assert!((sum - 1.0).abs() < 1e-9, "weights left the simplex");
                for i in 0..n {
                    if ds.sample_quality()[i] == 0 && preds[i] != ds.labels()[i] {
                        debug_assert!(
                            weights[i] <= before[i] + 1e-12,
                            "misclassified untrusted weight increased"
                        );
                    }
                }
            }
        }

        let n_learners = learners.len();
        Ok(TrAdaBoostModel {
            learners,
            betas,
            source_beta,
            n_iter: self.n_iter,
            // Iterations are 1-based; voting starts at ceil(M/2).
            vote_start: n_learners.div_ceil(2) - 1,
            n_classes: ds.n_classes(),
        })
    }
}

impl<L: Learner> BiqualityLearner for TrAdaBoost<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(self.fit(ds)?))
    }
}

/// Fitted TrAdaBoost ensemble; prediction is a `ln(1/beta_t)`-weighted vote
/// over the second half of the boosting rounds.
pub struct TrAdaBoostModel {
    learners: Vec<Box<dyn Classifier>>,
    betas: Vec<f64>,
    source_beta: f64,
    n_iter: usize,
    vote_start: usize,
    n_classes: usize,
}

impl TrAdaBoostModel {
    pub fn n_learners(&self) -> usize {
        self.learners.len()
    }

    /// Index of the first learner that participates in the vote.
    pub fn vote_start(&self) -> usize {
        self.vote_start
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn source_beta(&self) -> f64 {
        self.source_beta
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter
    }
}

impl Classifier for TrAdaBoostModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut scores = DMatrix::zeros(x.nrows(), self.n_classes);
        for t in self.vote_start..self.learners.len() {
            let vote = (1.0 / self.betas[t]).ln();
            let preds = self.learners[t].predict(x)?;
            for (i, &p) in preds.iter().enumerate() {
                scores[(i, p)] += vote;
            }
        }
        for i in 0..x.nrows() {
            let total: f64 = (0..self.n_classes).map(|j| scores[(i, j)]).sum();
            for j in 0..self.n_classes {
                scores[(i, j)] /= total;
            }
        }
        floor_and_normalize_rows(&mut scores);
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::LogisticRegression;
    use nalgebra::dmatrix;

    #[test]
    fn augmentation_layout_is_definitional() {
        let x = dmatrix![1.0, 2.0];
        let trusted = easy_adapt_transform(&x, &[1]).unwrap();
        assert_eq!(
            trusted.row(0).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 2.0, 1.0, 2.0, 0.0, 0.0]
        );
        let untrusted = easy_adapt_transform(&x, &[0]).unwrap();
        assert_eq!(
            untrusted.row(0).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 2.0, 0.0, 0.0, 1.0, 2.0]
        );
    }

    #[test]
    fn augmentation_shape() {
        let x = DMatrix::from_element(7, 4, 0.5);
        let out = easy_adapt_transform(&x, &[1, 0, 1, 0, 1, 0, 1]).unwrap();
        assert_eq!((out.nrows(), out.ncols()), (7, 12));
    }

    #[test]
    fn augmentation_recovers_original_features() {
        let x = dmatrix![1.0, -2.0; 3.5, 0.25];
        let out = easy_adapt_transform(&x, &[1, 0]).unwrap();
        for i in 0..2 {
            for c in 0..2 {
                assert_eq!(out[(i, c)], x[(i, c)]);
            }
            // Exactly one of the two domain blocks is all-zero per row.
            let trusted_zero = (0..2).all(|c| out[(i, 2 + c)] == 0.0);
            let untrusted_zero = (0..2).all(|c| out[(i, 4 + c)] == 0.0);
            assert!(trusted_zero != untrusted_zero);
        }
    }

    #[test]
    fn source_beta_formula() {
        let b = tradaboost_source_beta(100, 10);
        assert!((b - 0.5103).abs() < 1e-4, "{b}");
        assert_eq!(tradaboost_source_beta(0, 10), 1.0);
    }

    fn boost_ds() -> BiqualityDataset {
        let x = dmatrix![-2.0, 0.4; -1.8, -0.3; -2.2, 0.1; 2.0, 0.2; 1.9, -0.1; 2.1, 0.3;
                         -2.05, 0.0; 1.95, 0.05; -1.9, 0.2; 2.05, -0.25];
        let y = vec![0, 0, 0, 1, 1, 1, 0, 1, 0, 1];
        let q = vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
        BiqualityDataset::new(x, y, q, 2).unwrap()
    }

    #[test]
    fn perfect_weak_learner_stops_after_one_round() {
        let ds = boost_ds();
        let model = TrAdaBoost::new(LogisticRegression::default(), 10)
            .fit(&ds)
            .unwrap();
        assert_eq!(model.n_learners(), 1);
        assert_eq!(model.vote_start(), 0);
        // The ensemble is exactly that single learner.
        let single = LogisticRegression::default()
            .fit(
                ds.features(),
                ds.labels(),
                &vec![0.1; 10],
                2,
            )
            .unwrap();
        assert_eq!(
            model.predict(ds.features()).unwrap(),
            single.predict(ds.features()).unwrap()
        );
    }

    #[test]
    fn ensemble_votes_over_second_half_only() {
        // Heavily regularized logistic keeps trusted errors alive so the
        // boosting loop runs several rounds; weight-simplex and source-decay
        // invariants are debug-asserted inside fit().
        let x = dmatrix![-1.0, 0.0; -0.8, 0.4; 1.0, 0.3; 0.9, -0.4; -0.5, 1.0; 0.6, -1.0;
                         -0.9, -0.2; 0.95, 0.15; 0.4, 0.9; -0.4, -0.9];
        let y = vec![0, 1, 1, 0, 0, 1, 0, 1, 1, 0];
        let q = vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
        let ds = BiqualityDataset::new(x, y, q, 2).unwrap();
        let weak = LogisticRegression::default().with_l2(10.0).with_max_iter(20);
        let model = TrAdaBoost::new(weak, 6).fit(&ds).unwrap();
        let m = model.n_learners();
        assert!(m >= 1);
        assert_eq!(model.vote_start(), m.div_ceil(2) - 1);
        for &b in model.betas() {
            assert!(b > 0.0 && b < 1.0);
        }
        let p = model.predict_proba(ds.features()).unwrap();
        for i in 0..p.nrows() {
            let s: f64 = (0..2).map(|j| p[(i, j)]).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn all_trusted_reduces_to_adaboost_updates() {
        let x = dmatrix![-1.0, 0.0; -0.8, 0.4; 1.0, 0.3; 0.9, -0.4; -0.5, 1.0; 0.6, -1.0];
        let y = vec![0, 1, 1, 0, 0, 1];
        let ds = BiqualityDataset::new(x, y, vec![1; 6], 2).unwrap();
        let weak = LogisticRegression::default().with_l2(10.0).with_max_iter(20);
        let model = TrAdaBoost::new(weak, 4).fit(&ds).unwrap();
        assert_eq!(model.source_beta(), 1.0);
        assert!(model.n_learners() >= 1);
    }

    #[test]
    fn rejects_too_few_iterations() {
        let ds = boost_ds();
        assert!(matches!(
            TrAdaBoost::new(LogisticRegression::default(), 1).fit(&ds),
            Err(Error::InvalidParameter(_))
        ));
    }
}
