//! Built-in multinomial logistic regression with signed per-sample weights.
//!
//! The optimizer is deterministic full-batch gradient descent with
//! backtracking line search, so every downstream algorithm that composes
//! over it is reproducible bit-for-bit given the same inputs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::learner::{check_weights, floor_and_normalize_rows, Classifier, Learner};

/// Multinomial logistic regression configuration.
///
/// Minimizes `sum_i w_i * ce(y_i, softmax(theta^T x_i)) + l2_penalty/2 * ||W||^2`
/// where `W` excludes the intercept row. Weights may be negative (needed by
/// backward loss correction); the objective stays bounded below for any
/// positive `l2_penalty` because the regularizer grows faster than the
/// log-loss terms can decrease.
///
/// Weights and `l2_penalty` are jointly normalized by `mean(|w|)` before
/// optimizing, which leaves the minimizer unchanged and makes the fit
/// invariant to scaling both by the same positive constant.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    pub l2_penalty: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticRegression {
    fn default() -> Self {
        Self {
            l2_penalty: 1e-4,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

impl LogisticRegression {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_l2(mut self, l2_penalty: f64) -> Self {
        self.l2_penalty = l2_penalty;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Raw objective and gradient at `coef` ((d+1) × K, last row intercept),
    /// without the internal weight normalization applied by `fit`.
    pub fn objective_and_gradient(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        w: &[f64],
        n_classes: usize,
        coef: &DMatrix<f64>,
    ) -> Result<(f64, DMatrix<f64>)> {
        let xa = augment(x);
        validate_inputs(&xa, y, w, n_classes, coef)?;
        Ok(objective_gradient(&xa, y, w, n_classes, self.l2_penalty, coef))
    }
}

impl Learner for LogisticRegression {
    fn fit(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        w: &[f64],
        n_classes: usize,
    ) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(fit_logistic(self, x, y, w, n_classes)?))
    }

    fn supports_signed_weights(&self) -> bool {
        true
    }
}

/// A fitted logistic regression model.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    coef: DMatrix<f64>,
    n_classes: usize,
}

impl LogisticModel {
    /// Coefficients, (n_features + 1) × n_classes with the intercept last.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coef
    }
}

impl Classifier for LogisticModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() + 1 != self.coef.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} features but model was fitted on {}",
                x.ncols(),
                self.coef.nrows() - 1
            )));
        }
        let z = augment(x) * &self.coef;
        let mut p = softmax_rows(&z);
        floor_and_normalize_rows(&mut p);
        Ok(p)
    }
}

/// Fits the model, returning the concrete type (the `Learner` impl boxes it).
pub fn fit_logistic(
    config: &LogisticRegression,
    x: &DMatrix<f64>,
    y: &[usize],
    w: &[f64],
    n_classes: usize,
) -> Result<LogisticModel> {
    let xa = augment(x);
    let coef0 = DMatrix::zeros(xa.ncols(), n_classes);
    validate_inputs(&xa, y, w, n_classes, &coef0)?;
    check_weights(w, xa.nrows())?;

    // Two distinct labels must carry nonzero weight.
    let mut seen = vec![false; n_classes];
    for (i, &yi) in y.iter().enumerate() {
        if w[i] != 0.0 {
            seen[yi] = true;
        }
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::SingleClass(
            "need at least two distinct labels among samples with nonzero weight".into(),
        ));
    }

    // Normalize weights and penalty together; the minimizer is unchanged.
    let scale = w.iter().map(|v| v.abs()).sum::<f64>() / w.len() as f64;
    let wn: Vec<f64> = w.iter().map(|v| v / scale).collect();
    let l2 = config.l2_penalty / scale;

    let mut coef = coef0;
    let mut step = 1.0;
    for _ in 0..config.max_iter {
        let (f, grad) = objective_gradient(&xa, y, &wn, n_classes, l2, &coef);
        if grad.amax() < config.tol {
            break;
        }
        let g2 = grad.iter().map(|g| g * g).sum::<f64>();
        step = (step * 2.0).min(1e6);
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = &coef - &grad * step;
            let f_new = objective(&xa, y, &wn, n_classes, l2, &candidate);
            if f_new <= f - 1e-4 * step * g2 {
                coef = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // step underflow: numerically converged
        }
    }

    Ok(LogisticModel { coef, n_classes })
}

fn validate_inputs(
    xa: &DMatrix<f64>,
    y: &[usize],
    w: &[f64],
    n_classes: usize,
    coef: &DMatrix<f64>,
) -> Result<()> {
    let n = xa.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != n || w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} rows vs {} labels vs {} weights",
            n,
            y.len(),
            w.len()
        )));
    }
    if n_classes < 2 {
        return Err(Error::SingleClass("n_classes must be at least 2".into()));
    }
    if y.iter().any(|&yi| yi >= n_classes) {
        return Err(Error::LabelOutOfRange {
            label: *y.iter().max().unwrap(),
            n_classes,
        });
    }
    if xa.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features".into()));
    }
    if coef.nrows() != xa.ncols() || coef.ncols() != n_classes {
        return Err(Error::DimensionMismatch("coefficient shape".into()));
    }
    Ok(())
}

/// Appends a constant 1 column for the intercept.
fn augment(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut xa = DMatrix::zeros(x.nrows(), x.ncols() + 1);
    xa.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
    for i in 0..x.nrows() {
        xa[(i, x.ncols())] = 1.0;
    }
    xa
}

fn softmax_rows(z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = z.clone();
    for i in 0..z.nrows() {
        let m = (0..z.ncols()).fold(f64::NEG_INFINITY, |a, j| a.max(z[(i, j)]));
        let mut sum = 0.0;
        for j in 0..z.ncols() {
            let e = (z[(i, j)] - m).exp();
            p[(i, j)] = e;
            sum += e;
        }
        for j in 0..z.ncols() {
            p[(i, j)] /= sum;
        }
    }
    p
}

fn objective(
    xa: &DMatrix<f64>,
    y: &[usize],
    w: &[f64],
    n_classes: usize,
    l2: f64,
    coef: &DMatrix<f64>,
) -> f64 {
    let z = xa * coef;
    let mut loss = 0.0;
    for i in 0..xa.nrows() {
        let m = (0..n_classes).fold(f64::NEG_INFINITY, |a, j| a.max(z[(i, j)]));
        let lse = m + (0..n_classes)
            .map(|j| (z[(i, j)] - m).exp())
            .sum::<f64>()
            .ln();
        loss += w[i] * (lse - z[(i, y[i])]);
    }
    loss + 0.5 * l2 * reg_norm_sq(coef)
}

fn objective_gradient(
    xa: &DMatrix<f64>,
    y: &[usize],
    w: &[f64],
    n_classes: usize,
    l2: f64,
    coef: &DMatrix<f64>,
) -> (f64, DMatrix<f64>) {
    let z = xa * coef;
    let mut resid = softmax_rows(&z);
    let mut loss = 0.0;
    for i in 0..xa.nrows() {
        let m = (0..n_classes).fold(f64::NEG_INFINITY, |a, j| a.max(z[(i, j)]));
        let lse = m + (0..n_classes)
            .map(|j| (z[(i, j)] - m).exp())
            .sum::<f64>()
            .ln();
        loss += w[i] * (lse - z[(i, y[i])]);
        resid[(i, y[i])] -= 1.0;
        for j in 0..n_classes {
            resid[(i, j)] *= w[i];
        }
    }
    let mut grad = xa.transpose() * resid;
    // Intercept row is never regularized.
    for r in 0..coef.nrows() - 1 {
        for c in 0..n_classes {
            grad[(r, c)] += l2 * coef[(r, c)];
        }
    }
    (loss + 0.5 * l2 * reg_norm_sq(coef), grad)
}

fn reg_norm_sq(coef: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for r in 0..coef.nrows() - 1 {
        for c in 0..coef.ncols() {
            s += coef[(r, c)] * coef[(r, c)];
        }
    }
    s
}
