//! Label-noise transition matrices: GLC estimation, the matrix-based
//! corrections (Backward, IRLNL, Plugin) and the noise-robust Unhinged
//! classifier.

use nalgebra::{DMatrix, DVector};

use crate::dataset::BiqualityDataset;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::learner::{floor_and_normalize_rows, BiqualityLearner, Classifier, Learner};
use crate::logistic::LogisticRegression;

/// Corrections refuse transition matrices whose 1-norm condition number
/// reaches this limit; silently blowing up signed weights would be worse
/// than failing.
pub const CONDITION_LIMIT: f64 = 1e6;

/// Row-stochastic K × K matrix where entry `(i, j)` is the probability that
/// true class `i` is observed as class `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    m: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..m.nrows() {
            let mut sum = 0.0;
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::NotRowStochastic(format!(
                        "entry ({i}, {j}) = {v} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::NotRowStochastic(format!(
                    "row {i} sums to {sum}"
                )));
            }
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch(
                "transition matrix rows must all have length K".into(),
            ));
        }
        Self::new(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
    }

    pub fn identity(k: usize) -> Self {
        Self {
            m: DMatrix::identity(k, k),
        }
    }

    /// Diagonal `1 - noise_ratio`, off-diagonal mass spread uniformly.
    pub fn uniform_noise(k: usize, noise_ratio: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(
                "uniform noise needs at least 2 classes".into(),
            ));
        }
        if !(0.0..=1.0).contains(&noise_ratio) {
            return Err(Error::InvalidParameter(format!(
                "noise_ratio must be in [0, 1], got {noise_ratio}"
            )));
        }
        let off = noise_ratio / (k - 1) as f64;
        Self::new(DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                1.0 - noise_ratio
            } else {
                off
            }
        }))
    }

    pub fn n_classes(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// Inverse with a condition-number guard (`cond_1 < CONDITION_LIMIT`).
    pub fn inverse_guarded(&self) -> Result<DMatrix<f64>> {
        let inv = self.m.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let cond = norm1(&self.m) * norm1(&inv);
        if !cond.is_finite() || cond >= CONDITION_LIMIT {
            return Err(Error::IllConditioned {
                cond,
                limit: CONDITION_LIMIT,
            });
        }
        Ok(inv)
    }
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gold-loss-correction estimate: row `i` is the mean predicted probability
/// vector of `untrusted_model` over trusted samples labeled `i`, renormalized.
pub fn estimate_transition_glc(
    ds: &BiqualityDataset,
    untrusted_model: &dyn Classifier,
) -> Result<TransitionMatrix> {
    ds.require_trusted()?;
    let k = ds.n_classes();
    let trusted = ds.trusted_indices();
    let probs = untrusted_model.predict_proba(&ds.features().select_rows(trusted.iter()))?;
    if probs.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "model predicts {} classes but dataset declares {}",
            probs.ncols(),
            k
        )));
    }

    let mut t = DMatrix::zeros(k, k);
    let mut counts = vec![0usize; k];
    for (row, &i) in trusted.iter().enumerate() {
        let class = ds.labels()[i];
        counts[class] += 1;
        for j in 0..k {
            t[(class, j)] += probs[(row, j)];
        }
    }
    for (class, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(Error::ClassMissingFromTrusted { class });
        }
        let sum: f64 = (0..k).map(|j| t[(class, j)]).sum();
        for j in 0..k {
            t[(class, j)] /= sum;
        }
    }
    TransitionMatrix::new(t)
}

/// GLC with the built-in logistic regression fitted on the untrusted subset.
pub fn estimate_transition_glc_default(ds: &BiqualityDataset) -> Result<TransitionMatrix> {
    let untrusted = ds.untrusted_indices();
    if untrusted.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sub = ds.subset(&untrusted)?;
    let model =
        LogisticRegression::default().fit_unweighted(sub.features(), sub.labels(), ds.n_classes());
    estimate_transition_glc(ds, model?.as_ref())
}

/// One virtual training row per (untrusted sample, class) pair with nonzero
/// inverse-transition weight; trusted samples keep weight 1.
#[derive(Debug, Clone)]
pub struct BackwardExpansion {
    /// Row index into the original dataset each virtual sample copies.
    pub sample_indices: Vec<usize>,
    pub labels: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Expands a dataset for backward correction: each untrusted `(x, y~)`
/// becomes K virtual samples `(x, j)` weighted by `(T^-1)[j][y~]`.
pub fn backward_expansion(
    ds: &BiqualityDataset,
    transition: &TransitionMatrix,
    clip_negative: bool,
) -> Result<BackwardExpansion> {
    if transition.n_classes() != ds.n_classes() {
        return Err(Error::DimensionMismatch(
            "transition matrix size does not match n_classes".into(),
        ));
    }
    let inv = transition.inverse_guarded()?;
    let k = ds.n_classes();
    let mut out = BackwardExpansion {
        sample_indices: Vec::new(),
        labels: Vec::new(),
        weights: Vec::new(),
    };
    for i in 0..ds.n_samples() {
        if ds.sample_quality()[i] == 1 {
            out.sample_indices.push(i);
            out.labels.push(ds.labels()[i]);
            out.weights.push(1.0);
        } else {
            let observed = ds.labels()[i];
            for j in 0..k {
                let mut w = inv[(j, observed)];
                if clip_negative && w < 0.0 {
                    w = 0.0;
                }
                if w == 0.0 {
                    continue; // zero-weight virtual rows are dropped
                }
                out.sample_indices.push(i);
                out.labels.push(j);
                out.weights.push(w);
            }
        }
    }
    Ok(out)
}

/// Backward correction: fit the base learner on the inverse-transition
/// expansion of the untrusted samples.
pub fn fit_backward<L: Learner + ?Sized>(
    ds: &BiqualityDataset,
    transition: &TransitionMatrix,
    base: &L,
    clip_negative: bool,
) -> Result<Box<dyn Classifier>> {
    ds.require_trusted()?;
    let expansion = backward_expansion(ds, transition, clip_negative)?;
    if !clip_negative
        && !base.supports_signed_weights()
        && expansion.weights.iter().any(|&w| w < 0.0)
    {
        return Err(Error::SignedWeightsUnsupported);
    }
    let x = ds.features().select_rows(expansion.sample_indices.iter());
    base.fit(&x, &expansion.labels, &expansion.weights, ds.n_classes())
}

/// Importance weights for IRLNL: `beta = eta_hat[y~] / eta_tilde[y~]` where
/// `eta_hat = normalize(clip((T^T)^-1 eta_tilde, 0, inf))`. Trusted samples
/// keep weight 1.
pub fn irlnl_weights(
    ds: &BiqualityDataset,
    transition: &TransitionMatrix,
    noisy_model: &dyn Classifier,
    w_max: f64,
) -> Result<Vec<f64>> {
    if transition.n_classes() != ds.n_classes() {
        return Err(Error::DimensionMismatch(
            "transition matrix size does not match n_classes".into(),
        ));
    }
    let correction = transition.inverse_guarded()?.transpose();
    let untrusted = ds.untrusted_indices();
    let mut weights = vec![1.0; ds.n_samples()];
    if untrusted.is_empty() {
        return Ok(weights);
    }
    let probs = noisy_model.predict_proba(&ds.features().select_rows(untrusted.iter()))?;
    let k = ds.n_classes();
    for (row, &i) in untrusted.iter().enumerate() {
        let eta_tilde = DVector::from_fn(k, |j, _| probs[(row, j)]);
        let mut eta_hat = &correction * &eta_tilde;
        let mut sum = 0.0;
        for v in eta_hat.iter_mut() {
            *v = v.max(0.0);
            sum += *v;
        }
        let observed = ds.labels()[i];
        let beta = if sum > 0.0 {
            (eta_hat[observed] / sum) / eta_tilde[observed]
        } else {
            0.0
        };
        weights[i] = beta.clamp(0.0, w_max);
    }
    Ok(weights)
}

/// IRLNL: reweight untrusted samples by the corrected-to-noisy posterior
/// ratio of their observed label, then fit the base learner on everything.
pub fn fit_irlnl<L: Learner + ?Sized, N: Learner + ?Sized>(
    ds: &BiqualityDataset,
    transition: &TransitionMatrix,
    base: &L,
    noisy_learner: &N,
    w_max: f64,
) -> Result<Box<dyn Classifier>> {
    ds.require_trusted()?;
    transition.inverse_guarded()?;
    let untrusted = ds.untrusted_indices();
    if untrusted.is_empty() {
        return base.fit_unweighted(ds.features(), ds.labels(), ds.n_classes());
    }
    let sub = ds.subset(&untrusted)?;
    let noisy_model = noisy_learner.fit_unweighted(sub.features(), sub.labels(), ds.n_classes())?;
    let weights = irlnl_weights(ds, transition, noisy_model.as_ref(), w_max)?;
    base.fit(ds.features(), ds.labels(), &weights, ds.n_classes())
}

/// Applies the plugin correction `normalize(clip((T^T)^-1 p, 0, inf))` to
/// each probability row.
pub fn correct_probabilities(correction: &DMatrix<f64>, probs: &DMatrix<f64>) -> DMatrix<f64> {
    let k = probs.ncols();
    let mut out = DMatrix::zeros(probs.nrows(), k);
    for i in 0..probs.nrows() {
        let p = DVector::from_fn(k, |j, _| probs[(i, j)]);
        let mut corrected = correction * p;
        let mut sum = 0.0;
        for v in corrected.iter_mut() {
            *v = v.max(0.0);
            sum += *v;
        }
        for j in 0..k {
            out[(i, j)] = if sum > 0.0 {
                corrected[j] / sum
            } else {
                1.0 / k as f64
            };
        }
    }
    floor_and_normalize_rows(&mut out);
    out
}

/// Plugin-corrected classifier: the base model is trained on the labels
/// as-is and its predicted probabilities are inverted through the
/// transition matrix at prediction time.
pub struct PluginModel {
    base: Box<dyn Classifier>,
    correction: DMatrix<f64>,
    n_classes: usize,
}

impl PluginModel {
    /// The uncorrected base model (its training never saw the transition
    /// matrix, so it is identical across different corrections).
    pub fn base_model(&self) -> &dyn Classifier {
        self.base.as_ref()
    }
}

impl Classifier for PluginModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(correct_probabilities(
            &self.correction,
            &self.base.predict_proba(x)?,
        ))
    }
}

/// Plugin correction: train on noisy labels, invert the transition matrix
/// on predicted probabilities.
pub fn fit_plugin<L: Learner + ?Sized>(
    ds: &BiqualityDataset,
    transition: &TransitionMatrix,
    base: &L,
) -> Result<PluginModel> {
    ds.require_trusted()?;
    if transition.n_classes() != ds.n_classes() {
        return Err(Error::DimensionMismatch(
            "transition matrix size does not match n_classes".into(),
        ));
    }
    let correction = transition.inverse_guarded()?.transpose();
    let base = base.fit_unweighted(ds.features(), ds.labels(), ds.n_classes())?;
    Ok(PluginModel {
        base,
        correction,
        n_classes: transition.n_classes(),
    })
}

/// Backward correction as a biquality algorithm.
pub struct Backward<L> {
    pub transition: TransitionMatrix,
    pub base: L,
    pub clip_negative: bool,
}

impl<L> Backward<L> {
    pub fn new(transition: TransitionMatrix, base: L) -> Self {
        Self {
            transition,
            base,
            clip_negative: false,
        }
    }
}

impl<L: Learner> BiqualityLearner for Backward<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        fit_backward(ds, &self.transition, &self.base, self.clip_negative)
    }
}

/// IRLNL as a biquality algorithm. The noisy-posterior model defaults to the
/// built-in logistic regression.
pub struct Irlnl<L, N = LogisticRegression> {
    pub transition: TransitionMatrix,
    pub base: L,
    pub noisy_learner: N,
    pub w_max: f64,
}

impl<L> Irlnl<L> {
    pub fn new(transition: TransitionMatrix, base: L) -> Self {
        Self {
            transition,
            base,
            noisy_learner: LogisticRegression::default(),
            w_max: 1000.0,
        }
    }
}

impl<L: Learner, N: Learner> BiqualityLearner for Irlnl<L, N> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        fit_irlnl(ds, &self.transition, &self.base, &self.noisy_learner, self.w_max)
    }
}

/// Plugin correction as a biquality algorithm.
pub struct Plugin<L> {
    pub transition: TransitionMatrix,
    pub base: L,
}

impl<L> Plugin<L> {
    pub fn new(transition: TransitionMatrix, base: L) -> Self {
        Self { transition, base }
    }
}

impl<L: Learner> BiqualityLearner for Plugin<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(fit_plugin(ds, &self.transition, &self.base)?))
    }
}

/// Which matrix-based correction a GLC pipeline applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionMode {
    Backward,
    Irlnl,
    Plugin,
}

/// Estimates the transition matrix with GLC at fit time, then applies the
/// chosen correction. This is the form the benchmark registry exposes.
pub struct GlcCorrection<L> {
    pub mode: CorrectionMode,
    pub base: L,
    pub clip_negative: bool,
    pub w_max: f64,
}

impl<L> GlcCorrection<L> {
    pub fn new(mode: CorrectionMode, base: L) -> Self {
        Self {
            mode,
            base,
            clip_negative: false,
            w_max: 1000.0,
        }
    }
}

impl<L: Learner> BiqualityLearner for GlcCorrection<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        let transition = estimate_transition_glc_default(ds)?;
        match self.mode {
            CorrectionMode::Backward => {
                fit_backward(ds, &transition, &self.base, self.clip_negative)
            }
            CorrectionMode::Irlnl => fit_irlnl(
                ds,
                &transition,
                &self.base,
                &LogisticRegression::default(),
                self.w_max,
            ),
            CorrectionMode::Plugin => {
                Ok(Box::new(fit_plugin(ds, &transition, &self.base)?))
            }
        }
    }
}

/// Unhinged-loss classifier. The regularized minimizer has a closed form:
/// the scaled class-mean discriminant `f(x) = 1/(reg*n) * sum_i s_i k(x_i, x)`
/// per one-vs-rest problem, which makes it robust to symmetric label noise.
#[derive(Debug, Clone)]
pub struct Unhinged {
    pub kernel: Kernel,
    pub reg: f64,
}

impl Unhinged {
    pub fn linear() -> Self {
        Self {
            kernel: Kernel::Linear,
            reg: 1.0,
        }
    }

    pub fn with_kernel(kernel: Kernel) -> Self {
        Self { kernel, reg: 1.0 }
    }

    pub fn with_reg(mut self, reg: f64) -> Self {
        self.reg = reg;
        self
    }

    pub fn fit_weighted(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        w: &[f64],
        n_classes: usize,
    ) -> Result<UnhingedModel> {
        if !(self.reg > 0.0) {
            return Err(Error::InvalidParameter(
                "unhinged regularization must be positive".into(),
            ));
        }
        let n = x.nrows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if y.len() != n || w.len() != n {
            return Err(Error::DimensionMismatch(
                "labels/weights do not match feature rows".into(),
            ));
        }
        if y.iter().any(|&yi| yi >= n_classes) {
            return Err(Error::LabelOutOfRange {
                label: *y.iter().max().unwrap(),
                n_classes,
            });
        }
        let mut seen = vec![false; n_classes];
        for &yi in y {
            seen[yi] = true;
        }
        if seen.iter().filter(|&&s| s).count() < 2 {
            return Err(Error::SingleClass(
                "unhinged needs at least two observed classes".into(),
            ));
        }

        // One-vs-rest sign coefficients scaled by 1/(reg * n).
        let scale = 1.0 / (self.reg * n as f64);
        let alpha = DMatrix::from_fn(n, n_classes, |i, class| {
            let s = if y[i] == class { 1.0 } else { -1.0 };
            w[i] * s * scale
        });

        let repr = match self.kernel {
            Kernel::Linear => UnhingedRepr::Linear {
                // weights[class] = sum_i alpha[i][class] * x_i
                weights: x.transpose() * &alpha,
            },
            ref kernel => UnhingedRepr::Kernel {
                kernel: kernel.resolved_against(x),
                train: x.clone(),
                alpha,
            },
        };
        Ok(UnhingedModel { repr, n_classes })
    }
}

impl Learner for Unhinged {
    fn fit(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        w: &[f64],
        n_classes: usize,
    ) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(self.fit_weighted(x, y, w, n_classes)?))
    }

    fn supports_signed_weights(&self) -> bool {
        true
    }
}

impl BiqualityLearner for Unhinged {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        self.fit(
            ds.features(),
            ds.labels(),
            &vec![1.0; ds.n_samples()],
            ds.n_classes(),
        )
    }
}

enum UnhingedRepr {
    /// Per-class primal weights, d × K.
    Linear { weights: DMatrix<f64> },
    /// Dual coefficients over the training set, n × K.
    Kernel {
        kernel: Kernel,
        train: DMatrix<f64>,
        alpha: DMatrix<f64>,
    },
}

pub struct UnhingedModel {
    repr: UnhingedRepr,
    n_classes: usize,
}

impl UnhingedModel {
    /// Raw per-class decision scores (n × K) before the softmax link.
    pub fn decision_scores(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match &self.repr {
            UnhingedRepr::Linear { weights } => {
                if x.ncols() != weights.nrows() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} features but model was fitted on {}",
                        x.ncols(),
                        weights.nrows()
                    )));
                }
                Ok(x * weights)
            }
            UnhingedRepr::Kernel {
                kernel,
                train,
                alpha,
            } => Ok(kernel.gram(x, train)? * alpha),
        }
    }

    /// Primal weights (d × K) when the kernel is linear.
    pub fn linear_weights(&self) -> Option<&DMatrix<f64>> {
        match &self.repr {
            UnhingedRepr::Linear { weights } => Some(weights),
            UnhingedRepr::Kernel { .. } => None,
        }
    }
}

impl Classifier for UnhingedModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let scores = self.decision_scores(x)?;
        let mut p = DMatrix::zeros(scores.nrows(), scores.ncols());
        for i in 0..scores.nrows() {
            let m = (0..scores.ncols()).fold(f64::NEG_INFINITY, |a, j| a.max(scores[(i, j)]));
            let mut sum = 0.0;
            for j in 0..scores.ncols() {
                let e = (scores[(i, j)] - m).exp();
                p[(i, j)] = e;
                sum += e;
            }
            for j in 0..scores.ncols() {
                p[(i, j)] /= sum;
            }
        }
        floor_and_normalize_rows(&mut p);
        Ok(p)
    }
}
