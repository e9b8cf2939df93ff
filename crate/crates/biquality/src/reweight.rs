//! Importance-reweighting algorithms: K-KMM, IRBL and K-PDR estimate
//! per-untrusted-sample weights that map the untrusted distribution onto
//! the trusted one, then fit a base learner on the reweighted data.

use nalgebra::{DMatrix, DVector};

use crate::dataset::BiqualityDataset;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::learner::{BiqualityLearner, Classifier, Learner, PROBA_FLOOR};
use crate::logistic::LogisticRegression;

/// One kernel-mean-matching quadratic program:
/// minimize `1/2 b^T K b - kappa^T b` subject to `0 <= b_i <= box_bound`
/// and `|mean(b) - 1| <= mean_slack`.
#[derive(Debug, Clone)]
pub struct KmmProblem {
    pub gram_uu: DMatrix<f64>,
    pub kappa: DVector<f64>,
    pub box_bound: f64,
    pub mean_slack: f64,
}

impl KmmProblem {
    /// Assembles the QP from raw features: `gram_uu` over the untrusted rows
    /// and `kappa_i = (n_u / n_t) * sum_j k(u_i, t_j)`.
    pub fn from_features(
        kernel: &Kernel,
        untrusted: &DMatrix<f64>,
        trusted: &DMatrix<f64>,
        box_bound: f64,
        mean_slack: f64,
    ) -> Result<Self> {
        if untrusted.nrows() == 0 || trusted.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let gram_uu = kernel.gram(untrusted, untrusted)?;
        let cross = kernel.gram(untrusted, trusted)?;
        let ratio = untrusted.nrows() as f64 / trusted.nrows() as f64;
        let kappa = DVector::from_fn(untrusted.nrows(), |i, _| {
            ratio * (0..trusted.nrows()).map(|j| cross[(i, j)]).sum::<f64>()
        });
        Ok(Self {
            gram_uu,
            kappa,
            box_bound,
            mean_slack,
        })
    }

    pub fn n(&self) -> usize {
        self.kappa.len()
    }

    fn validate(&self) -> Result<(DMatrix<f64>, f64)> {
        let n = self.n();
        if self.gram_uu.nrows() != n || self.gram_uu.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "gram is {}x{} but kappa has length {n}",
                self.gram_uu.nrows(),
                self.gram_uu.ncols()
            )));
        }
        if self.gram_uu.iter().any(|v| !v.is_finite())
            || self.kappa.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("kmm problem".into()));
        }
        if !(self.box_bound > 0.0) {
            return Err(Error::InvalidParameter(
                "box_bound must be positive".into(),
            ));
        }
        if self.mean_slack < 0.0 {
            return Err(Error::InvalidParameter(
                "mean_slack must be nonnegative".into(),
            ));
        }
        if self.box_bound < 1.0 - self.mean_slack - 1e-12 {
            return Err(Error::Infeasible(format!(
                "box_bound {} < 1 - mean_slack {}",
                self.box_bound, self.mean_slack
            )));
        }
        let scale = self.gram_uu.amax().max(1.0);
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.gram_uu[(i, j)] - self.gram_uu[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-8 * scale {
            return Err(Error::InvalidParameter(format!(
                "gram matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let ks = (&self.gram_uu + self.gram_uu.transpose()) * 0.5;
        let (lambda_max, lambda_min) = extreme_eigenvalues(&ks);
        if lambda_min < -1e-8 * lambda_max.max(1.0) {
            return Err(Error::NotPsd {
                min_eig: lambda_min,
            });
        }
        Ok((ks, lambda_max))
    }
}

/// Solver output; `objective_trace` records the accepted objective values
/// so callers can audit convergence.
#[derive(Debug, Clone)]
pub struct KmmSolution {
    pub beta: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

/// Projected gradient with step `1/lambda_max` (estimated by power
/// iteration) and Dykstra alternating projection onto box ∩ mean-slab.
/// Steps that would increase the objective are halved, so the accepted
/// trace is non-increasing.
pub fn solve_kmm(problem: &KmmProblem) -> Result<KmmSolution> {
    let (ks, lambda_max) = problem.validate()?;
    let n = problem.n();
    let b = problem.box_bound;
    let lo = 1.0 - problem.mean_slack;
    let hi = 1.0 + problem.mean_slack;

    let objective = |beta: &DVector<f64>| 0.5 * beta.dot(&(&ks * beta)) - problem.kappa.dot(beta);

    let step0 = 1.0 / lambda_max.max(1e-12);
    let mut beta = project_box_slab(&DVector::from_element(n, 1.0), b, lo, hi);
    let mut f = objective(&beta);
    let mut trace = vec![f];
    let mut step = step0;
    let max_iter = if n <= 64 { 50_000 } else { 2_000 };
    let mut stall = 0usize;
    let mut iterations = 0usize;

    for _ in 0..max_iter {
        iterations += 1;
        let grad = &ks * &beta - &problem.kappa;
        let mut t = step;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = project_box_slab(&(&beta - &grad * t), b, lo, hi);
            let fc = objective(&candidate);
            if fc <= f {
                if f - fc <= 1e-15 * (1.0 + f.abs()) {
                    stall += 1;
                } else {
                    stall = 0;
                }
                beta = candidate;
                f = fc;
                trace.push(f);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || stall >= 10 {
            break;
        }
        step = (t * 2.0).min(step0);
    }

    Ok(KmmSolution {
        beta,
        objective: f,
        iterations,
        objective_trace: trace,
    })
}

/// Euclidean projection onto `[0, b]^n ∩ {lo <= mean <= hi}` by Dykstra's
/// alternating method; the slab step runs last so the mean constraint holds
/// exactly on return.
fn project_box_slab(v: &DVector<f64>, b: f64, lo: f64, hi: f64) -> DVector<f64> {
    let n = v.len();
    let clamp_box = |x: &DVector<f64>| x.map(|e| e.clamp(0.0, b));
    let project_slab = |x: &DVector<f64>| {
        let mean = x.sum() / n as f64;
        if mean > hi {
            x.add_scalar(hi - mean)
        } else if mean < lo {
            x.add_scalar(lo - mean)
        } else {
            x.clone()
        }
    };

    let mut x = v.clone();
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    for _ in 0..500 {
        let y = clamp_box(&(&x + &p));
        p = &x + &p - &y;
        let z = project_slab(&(&y + &q));
        q = &y + &q - &z;
        let change = (&z - &x).amax();
        x = z;
        if change < 1e-14 {
            break;
        }
    }
    project_slab(&clamp_box(&x))
}

/// Dominant and smallest eigenvalues of a symmetric matrix via shifted
/// power iteration (50 rounds each).
fn extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let dominant = |a: &DMatrix<f64>| -> f64 {
        let n = a.nrows();
        let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let mut lam = 0.0;
        for _ in 0..50 {
            let w = a * &v;
            let norm = w.norm();
            if norm < 1e-300 {
                return 0.0;
            }
            v = w / norm;
            lam = v.dot(&(a * &v));
        }
        lam
    };
    let lam_dom = dominant(m);
    let sigma = lam_dom.abs().max(1e-12);
    let shifted = DMatrix::identity(m.nrows(), m.nrows()) * sigma - m;
    let lambda_min = sigma - dominant(&shifted);
    let shifted_up = DMatrix::identity(m.nrows(), m.nrows()) * sigma + m;
    let lambda_max = dominant(&shifted_up) - sigma;
    (lambda_max, lambda_min)
}

/// K-KMM: one kernel-mean-matching problem per class, matching each class's
/// untrusted samples against the trusted samples of the same class.
pub struct Kkmm<L> {
    pub kernel: Kernel,
    pub base: L,
    /// Upper box bound on individual weights.
    pub box_bound: f64,
    /// Mean-slack; `None` uses the classical `(sqrt(n_u) - 1) / sqrt(n_u)`
    /// per class.
    pub mean_slack: Option<f64>,
    /// When a class has no trusted samples: strict policy (false) gives its
    /// untrusted samples weight 0; permissive (true) matches them against
    /// all trusted samples instead.
    pub permissive: bool,
}

impl<L> Kkmm<L> {
    pub fn new(kernel: Kernel, base: L) -> Self {
        Self {
            kernel,
            base,
            box_bound: 1000.0,
            mean_slack: None,
            permissive: false,
        }
    }
}

impl<L> Kkmm<L> {
    /// Full-length weight vector: solved per-class betas for untrusted rows,
    /// exactly 1 for trusted rows.
    pub fn weights(&self, ds: &BiqualityDataset) -> Result<Vec<f64>> {
        ds.require_trusted()?;
        let kernel = self.kernel.resolved_against(ds.features());
        let mut weights = vec![1.0; ds.n_samples()];
        let all_trusted = ds.trusted_indices();
        for class in 0..ds.n_classes() {
            let members: Vec<usize> = (0..ds.n_samples())
                .filter(|&i| ds.labels()[i] == class)
                .collect();
            let u_idx: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| ds.sample_quality()[i] == 0)
                .collect();
            if u_idx.is_empty() {
                continue;
            }
            let t_idx: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| ds.sample_quality()[i] == 1)
                .collect();
            let target = if t_idx.is_empty() {
                if !self.permissive {
                    // No trusted mass to match: the strict policy removes them.
                    for &i in &u_idx {
                        weights[i] = 0.0;
                    }
                    continue;
                }
                &all_trusted
            } else {
                &t_idx
            };
            let xu = ds.features().select_rows(u_idx.iter());
            let xt = ds.features().select_rows(target.iter());
            let n_u = u_idx.len() as f64;
            let slack = self
                .mean_slack
                .unwrap_or((n_u.sqrt() - 1.0) / n_u.sqrt());
            let problem =
                KmmProblem::from_features(&kernel, &xu, &xt, self.box_bound, slack)?;
            let solution = solve_kmm(&problem)?;
            for (r, &i) in u_idx.iter().enumerate() {
                weights[i] = solution.beta[r].max(0.0);
            }
        }
        Ok(weights)
    }
}

impl<L: Learner> BiqualityLearner for Kkmm<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        let weights = self.weights(ds)?;
        self.base
            .fit(ds.features(), ds.labels(), &weights, ds.n_classes())
    }
}

/// IRBL: weight each untrusted sample by the ratio of trusted-model to
/// untrusted-model posterior at its observed label. Both models are
/// independent fits of the same learner configuration.
pub struct Irbl<L> {
    pub learner: L,
    pub w_max: f64,
}

impl<L> Irbl<L> {
    pub fn new(learner: L) -> Self {
        Self {
            learner,
            w_max: 1000.0,
        }
    }
}

impl<L: Learner> Irbl<L> {
    pub fn weights(&self, ds: &BiqualityDataset) -> Result<Vec<f64>> {
        ds.require_trusted()?;
        let trusted = ds.trusted_indices();
        let trusted_classes = distinct_labels(ds.labels(), &trusted);
        if trusted_classes < 2 {
            return Err(Error::SingleClass(
                "trusted subset needs at least two classes to fit the ratio models".into(),
            ));
        }
        let mut weights = vec![1.0; ds.n_samples()];
        let untrusted = ds.untrusted_indices();
        if untrusted.is_empty() {
            return Ok(weights);
        }

        let sub_t = ds.subset(&trusted)?;
        let f_t = self
            .learner
            .fit_unweighted(sub_t.features(), sub_t.labels(), ds.n_classes())?;
        let sub_u = ds.subset(&untrusted)?;
        let f_u = self
            .learner
            .fit_unweighted(sub_u.features(), sub_u.labels(), ds.n_classes())?;

        let xu = ds.features().select_rows(untrusted.iter());
        let p_t = f_t.predict_proba(&xu)?;
        let p_u = f_u.predict_proba(&xu)?;
        for (row, &i) in untrusted.iter().enumerate() {
            let y = ds.labels()[i];
            let beta = p_t[(row, y)] / p_u[(row, y)];
            weights[i] = beta.clamp(0.0, self.w_max);
        }
        Ok(weights)
    }
}

impl<L: Learner> BiqualityLearner for Irbl<L> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        let weights = self.weights(ds)?;
        self.learner
            .fit(ds.features(), ds.labels(), &weights, ds.n_classes())
    }
}

/// K-PDR: per-class probabilistic density ratio. A binary discriminator is
/// fitted per class on trusted-vs-untrusted membership and untrusted weights
/// are the prior-corrected discriminator odds
/// `(n_u^k / n_t^k) * p(trusted|x) / (1 - p(trusted|x))`.
pub struct Kpdr<L, D = LogisticRegression> {
    pub base: L,
    pub discriminator: D,
    pub w_max: f64,
}

impl<L> Kpdr<L> {
    pub fn new(base: L) -> Self {
        Self {
            base,
            discriminator: LogisticRegression::default(),
            w_max: 1000.0,
        }
    }
}

impl<L, D: Learner> Kpdr<L, D> {
    pub fn weights(&self, ds: &BiqualityDataset) -> Result<Vec<f64>> {
        ds.require_trusted()?;
        let mut weights = vec![1.0; ds.n_samples()];
        let mut global: Option<Box<dyn Classifier>> = None;
        let n_trusted_total = ds.n_trusted();
        let n_untrusted_total = ds.n_untrusted();

        for class in 0..ds.n_classes() {
            let members: Vec<usize> = (0..ds.n_samples())
                .filter(|&i| ds.labels()[i] == class)
                .collect();
            let u_idx: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| ds.sample_quality()[i] == 0)
                .collect();
            if u_idx.is_empty() {
                continue;
            }
            let t_count = members.len() - u_idx.len();

            let (probs, ratio) = if t_count == 0 {
                // No trusted members: fall back to the global discriminator.
                if global.is_none() {
                    global = Some(self.fit_discriminator(ds, &(0..ds.n_samples()).collect::<Vec<_>>())?);
                }
                let model = global.as_ref().unwrap();
                let xu = ds.features().select_rows(u_idx.iter());
                (
                    model.predict_proba(&xu)?,
                    n_untrusted_total as f64 / n_trusted_total as f64,
                )
            } else {
                let model = self.fit_discriminator(ds, &members)?;
                let xu = ds.features().select_rows(u_idx.iter());
                (
                    model.predict_proba(&xu)?,
                    u_idx.len() as f64 / t_count as f64,
                )
            };

            for (row, &i) in u_idx.iter().enumerate() {
                let p = probs[(row, 1)].max(PROBA_FLOOR);
                let odds = p / (1.0 - p).max(PROBA_FLOOR);
                weights[i] = (ratio * odds).clamp(0.0, self.w_max);
            }
        }
        Ok(weights)
    }

    fn fit_discriminator(
        &self,
        ds: &BiqualityDataset,
        rows: &[usize],
    ) -> Result<Box<dyn Classifier>> {
        let x = ds.features().select_rows(rows.iter());
        let target: Vec<usize> = rows.iter().map(|&i| ds.sample_quality()[i] as usize).collect();
        self.discriminator
            .fit(&x, &target, &vec![1.0; rows.len()], 2)
    }
}

impl<L: Learner, D: Learner> BiqualityLearner for Kpdr<L, D> {
    fn fit_biquality(&self, ds: &BiqualityDataset) -> Result<Box<dyn Classifier>> {
        let weights = self.weights(ds)?;
        self.base
            .fit(ds.features(), ds.labels(), &weights, ds.n_classes())
    }
}

fn distinct_labels(labels: &[usize], indices: &[usize]) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    for &i in indices {
        seen.insert(labels[i]);
    }
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn matched_distributions_keep_unit_weights() {
        let pts = dmatrix![0.0, 0.0; 1.0, 0.5; -0.5, 1.0];
        let problem = KmmProblem::from_features(
            &Kernel::rbf_with_gamma(0.5),
            &pts,
            &pts,
            10.0,
            0.01,
        )
        .unwrap();
        let solution = solve_kmm(&problem).unwrap();
        for i in 0..3 {
            assert_relative_eq!(solution.beta[i], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn hand_solved_two_point_problem() {
        // Linear kernel, untrusted {0, 1}, trusted {0}: objective reduces to
        // beta_2^2 / 2 under mean(beta) = 1, so the minimizer is (2, 0).
        let untrusted = dmatrix![0.0; 1.0];
        let trusted = dmatrix![0.0];
        let problem =
            KmmProblem::from_features(&Kernel::Linear, &untrusted, &trusted, 10.0, 0.0).unwrap();
        assert_eq!(problem.gram_uu, dmatrix![0.0, 0.0; 0.0, 1.0]);
        assert_eq!(problem.kappa, DVector::from_vec(vec![0.0, 0.0]));
        let solution = solve_kmm(&problem).unwrap();
        assert_relative_eq!(solution.beta[0], 2.0, epsilon = 1e-6);
        assert_relative_eq!(solution.beta[1], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn unconstrained_identity_gram_returns_kappa() {
        let problem = KmmProblem {
            gram_uu: DMatrix::identity(3, 3),
            kappa: DVector::from_vec(vec![0.3, 1.7, 0.9]),
            box_bound: f64::INFINITY,
            mean_slack: f64::INFINITY,
        };
        let solution = solve_kmm(&problem).unwrap();
        for i in 0..3 {
            assert_relative_eq!(solution.beta[i], problem.kappa[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn infeasible_bounds_rejected() {
        let problem = KmmProblem {
            gram_uu: DMatrix::identity(2, 2),
            kappa: DVector::from_element(2, 1.0),
            box_bound: 0.5,
            mean_slack: 0.1,
        };
        assert!(matches!(solve_kmm(&problem), Err(Error::Infeasible(_))));
    }

    #[test]
    fn non_psd_gram_rejected() {
        let problem = KmmProblem {
            gram_uu: dmatrix![0.0, 2.0; 2.0, 0.0],
            kappa: DVector::from_element(2, 1.0),
            box_bound: 3.0,
            mean_slack: 0.5,
        };
        assert!(matches!(solve_kmm(&problem), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn solution_satisfies_constraints_and_monotone_trace() {
        let a = dmatrix![1.0, 0.3, 0.1; 0.3, 0.8, 0.2; 0.1, 0.2, 1.2];
        let problem = KmmProblem {
            gram_uu: &a * a.transpose(),
            kappa: DVector::from_vec(vec![2.0, -1.0, 0.5]),
            box_bound: 3.0,
            mean_slack: 0.2,
        };
        let solution = solve_kmm(&problem).unwrap();
        for v in solution.beta.iter() {
            assert!(*v >= -1e-12 && *v <= 3.0 + 1e-12);
        }
        let mean = solution.beta.sum() / 3.0;
        assert!(mean >= 0.8 - 1e-9 && mean <= 1.2 + 1e-9);
        for w in solution.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn pinned_box_forces_unit_weights() {
        let pts = dmatrix![0.0, 1.0; 2.0, -1.0; 0.5, 0.5; -1.0, 2.0];
        let ds = BiqualityDataset::new(
            pts,
            vec![0, 1, 0, 1],
            vec![1, 1, 0, 0],
            2,
        )
        .unwrap();
        let kkmm = Kkmm {
            kernel: Kernel::rbf(),
            base: LogisticRegression::default(),
            box_bound: 1.0,
            mean_slack: Some(0.0),
            permissive: false,
        };
        let w = kkmm.weights(&ds).unwrap();
        for v in w {
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn class_missing_from_trusted_gets_zero_weight() {
        let pts = dmatrix![0.0; 0.1; 5.0; 5.1];
        let ds = BiqualityDataset::new(pts, vec![0, 0, 1, 1], vec![1, 0, 0, 0], 2).unwrap();
        let kkmm = Kkmm::new(Kernel::rbf(), LogisticRegression::default());
        let w = kkmm.weights(&ds).unwrap();
        assert_eq!(w[0], 1.0);
        assert_eq!(w[2], 0.0);
        assert_eq!(w[3], 0.0);
        // Permissive mode matches against all trusted samples instead.
        let permissive = Kkmm {
            permissive: true,
            ..Kkmm::new(Kernel::rbf(), LogisticRegression::default())
        };
        let wp = permissive.weights(&ds).unwrap();
        assert!(wp[2] > 0.0);
    }

    #[test]
    fn irbl_identical_distributions_give_unit_weights() {
        // Trusted and untrusted hold the same samples, so both ratio models
        // are identical fits and every ratio is exactly 1.
        let x = dmatrix![-2.0, 0.0; -1.8, 0.2; 2.0, 0.1; 1.9, -0.2;
                         -2.0, 0.0; -1.8, 0.2; 2.0, 0.1; 1.9, -0.2];
        let y = vec![0, 0, 1, 1, 0, 0, 1, 1];
        let q = vec![1, 1, 1, 1, 0, 0, 0, 0];
        let ds = BiqualityDataset::new(x, y, q, 2).unwrap();
        let irbl = Irbl::new(LogisticRegression::default());
        let w = irbl.weights(&ds).unwrap();
        for v in w {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn irbl_suppresses_contradicted_labels() {
        let x = dmatrix![-3.0, 0.0; -2.9, 0.1; -3.1, -0.1; 3.0, 0.0; 2.9, 0.1; 3.1, -0.1;
                         -3.0, 0.05; 3.0, -0.05; -2.95, 0.0];
        let y = vec![0, 0, 0, 1, 1, 1, 0, 1, 1]; // last sample mislabeled
        let q = vec![1, 1, 1, 1, 1, 1, 0, 0, 0];
        let ds = BiqualityDataset::new(x, y, q, 2).unwrap();
        let irbl = Irbl::new(LogisticRegression::default());
        let w = irbl.weights(&ds).unwrap();
        let clean_mean = (w[6] + w[7]) / 2.0;
        assert!(
            w[8] < 0.5 * clean_mean,
            "mislabeled weight {} vs clean mean {}",
            w[8],
            clean_mean
        );
    }

    #[test]
    fn irbl_single_class_trusted_rejected() {
        let x = dmatrix![0.0; 1.0; 2.0; 3.0];
        let ds = BiqualityDataset::new(x, vec![0, 0, 1, 0], vec![1, 1, 0, 0], 2).unwrap();
        assert!(matches!(
            Irbl::new(LogisticRegression::default()).weights(&ds),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn kpdr_indistinguishable_classes_get_prior_ratio() {
        // Untrusted duplicates the trusted points twice: the discriminator
        // cannot separate them, so weights concentrate near n_u/n_t = 2.
        let base = dmatrix![-1.0, 0.0; -0.8, 0.3; 1.0, 0.1; 0.9, -0.2];
        let mut rows: Vec<usize> = (0..4).collect();
        rows.extend(0..4);
        rows.extend(0..4);
        let x = base.select_rows(rows.iter());
        let y: Vec<usize> = rows.iter().map(|&i| if i < 2 { 0 } else { 1 }).collect();
        let q: Vec<u8> = (0..12).map(|i| if i < 4 { 1 } else { 0 }).collect();
        let ds = BiqualityDataset::new(x, y, q, 2).unwrap();
        let kpdr = Kpdr::new(LogisticRegression::default());
        let w = kpdr.weights(&ds).unwrap();
        for i in 4..12 {
            assert!(
                (w[i] - 2.0).abs() < 0.5,
                "weight {} strays from prior ratio 2",
                w[i]
            );
        }
        for i in 0..4 {
            assert_eq!(w[i], 1.0);
        }
    }

    #[test]
    fn trusted_weights_stay_exactly_one() {
        let x = dmatrix![-2.0, 0.0; -1.8, 0.2; 2.0, 0.1; 1.9, -0.2;
                         -2.1, 0.1; 1.7, 0.0; -1.9, -0.1; 2.2, 0.2];
        let y = vec![0, 0, 1, 1, 0, 1, 0, 1];
        let q = vec![1, 1, 1, 1, 0, 0, 0, 0];
        let ds = BiqualityDataset::new(x, y, q, 2).unwrap();
        let trusted = [0usize, 1, 2, 3];

        let w = Kkmm::new(Kernel::rbf(), LogisticRegression::default())
            .weights(&ds)
            .unwrap();
        assert!(trusted.iter().all(|&i| w[i] == 1.0));
        let w = Irbl::new(LogisticRegression::default()).weights(&ds).unwrap();
        assert!(trusted.iter().all(|&i| w[i] == 1.0));
        let w = Kpdr::new(LogisticRegression::default()).weights(&ds).unwrap();
        assert!(trusted.iter().all(|&i| w[i] == 1.0));
    }
}
