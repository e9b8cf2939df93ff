//! Synthetic corruption generators: label noise (class-, instance- and
//! feature-dependent), weak labels, class imbalance and sampling bias.
//! Every generator is a pure function of its inputs and a seed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::dataset::BiqualityDataset;
use crate::error::{Error, Result};
use crate::learner::{Classifier, Learner};

/// Row-stochastic relabeling matrix: entry `(i, j)` is the probability of
/// relabeling class `i` as class `j`. Same invariants as a transition matrix.
pub use crate::transition::TransitionMatrix as NoiseMatrix;

/// What a corruption run actually did, for audit and reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionReport {
    pub n_corrupted: usize,
    /// `n_corrupted / n`: the disagreement rate between input and output
    /// labels, equal to the off-diagonal mass of `per_class_flip_counts`
    /// over the number of samples.
    pub realized_noise_ratio: f64,
    pub per_class_flip_counts: Vec<Vec<usize>>,
    pub seed: u64,
}

impl CorruptionReport {
    fn from_labels(before: &[usize], after: &[usize], n_classes: usize, seed: u64) -> Self {
        let mut counts = vec![vec![0usize; n_classes]; n_classes];
        let mut corrupted = 0;
        for (&b, &a) in before.iter().zip(after) {
            counts[b][a] += 1;
            if b != a {
                corrupted += 1;
            }
        }
        Self {
            n_corrupted: corrupted,
            realized_noise_ratio: corrupted as f64 / before.len() as f64,
            per_class_flip_counts: counts,
            seed,
        }
    }
}

fn check_labels(y: &[usize], n_classes: usize) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for &v in y {
        if v >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: v,
                n_classes,
            });
        }
    }
    Ok(())
}

/// Draws an index from a probability row; the final bucket absorbs any
/// floating-point remainder.
fn sample_categorical(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    row.len() - 1
}

/// Resamples every label independently from its noise-matrix row.
pub fn make_label_noise(
    y: &[usize],
    matrix: &NoiseMatrix,
    seed: u64,
) -> Result<(Vec<usize>, CorruptionReport)> {
    let k = matrix.n_classes();
    check_labels(y, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| matrix.entry(i, j)).collect())
        .collect();
    let noisy: Vec<usize> = y
        .iter()
        .map(|&yi| sample_categorical(&rows[yi], rng.gen::<f64>()))
        .collect();
    let report = CorruptionReport::from_labels(y, &noisy, k, seed);
    Ok((noisy, report))
}

/// Flips sample `i` with probability `flip_prob[i]`; the replacement label
/// is drawn from the off-diagonal-renormalized noise-matrix row.
pub fn make_instance_dependent_label_noise(
    y: &[usize],
    flip_prob: &[f64],
    matrix: &NoiseMatrix,
    seed: u64,
) -> Result<(Vec<usize>, CorruptionReport)> {
    let k = matrix.n_classes();
    check_labels(y, k)?;
    if flip_prob.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} flip probabilities for {} labels",
            flip_prob.len(),
            y.len()
        )));
    }
    if flip_prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter(
            "flip probabilities must lie in [0, 1]".into(),
        ));
    }

    // Off-diagonal rows renormalized; rows with no off-diagonal mass cannot
    // flip, which is an error whenever some sample of that class could flip.
    let mut off_rows: Vec<Option<Vec<f64>>> = Vec::with_capacity(k);
    for i in 0..k {
        let mass: f64 = (0..k).filter(|&j| j != i).map(|j| matrix.entry(i, j)).sum();
        if mass > 0.0 {
            off_rows.push(Some(
                (0..k)
                    .map(|j| if j == i { 0.0 } else { matrix.entry(i, j) / mass })
                    .collect(),
            ));
        } else {
            off_rows.push(None);
        }
    }
    for (i, &yi) in y.iter().enumerate() {
        if flip_prob[i] > 0.0 && off_rows[yi].is_none() {
            return Err(Error::ZeroOffDiagonalMass { class: yi });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = Vec::with_capacity(y.len());
    for (i, &yi) in y.iter().enumerate() {
        let flip = rng.gen::<f64>() < flip_prob[i];
        if flip {
            let row = off_rows[yi].as_ref().expect("checked above");
            noisy.push(sample_categorical(row, rng.gen::<f64>()));
        } else {
            noisy.push(yi);
        }
    }
    let report = CorruptionReport::from_labels(y, &noisy, k, seed);
    Ok((noisy, report))
}

/// Per-sample flip probabilities proportional to the model's uncertainty
/// about the true label, scaled so their mean hits `target_ratio`.
///
/// The scale is solved by bisection on the clamped map
/// `c -> mean(min(c * u_i, 1))`, which is monotone; the result is exact to
/// 1e-6.
pub fn uncertainty_noise_probability(
    x: &DMatrix<f64>,
    y: &[usize],
    model: &dyn Classifier,
    target_ratio: f64,
) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&target_ratio) {
        return Err(Error::InvalidParameter(format!(
            "target_ratio must be in [0, 1), got {target_ratio}"
        )));
    }
    let probs = model.predict_proba(x)?;
    check_labels(y, probs.ncols())?;
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(
            "labels do not match feature rows".into(),
        ));
    }
    let u: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(i, &yi)| (1.0 - probs[(i, yi)]).max(0.0))
        .collect();
    if target_ratio == 0.0 {
        return Ok(vec![0.0; y.len()]);
    }
    let max_u = u.iter().fold(0.0f64, |a, &b| a.max(b));
    if max_u <= 0.0 {
        return Err(Error::TargetUnreachable(
            "all uncertainty scores are zero".into(),
        ));
    }

    let mean_clamped = |c: f64| -> f64 {
        u.iter().map(|&v| (c * v).min(1.0)).sum::<f64>() / u.len() as f64
    };

    let mut hi = 1.0 / max_u;
    let mut grow = 0;
    while mean_clamped(hi) < target_ratio {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::TargetUnreachable(format!(
                "mean flip probability saturates below {target_ratio}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean_clamped(mid) < target_ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let p: Vec<f64> = u.iter().map(|&v| (c * v).min(1.0)).collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    if (mean - target_ratio).abs() > 1e-6 {
        return Err(Error::TargetUnreachable(format!(
            "calibrated mean {mean} misses target {target_ratio}"
        )));
    }
    Ok(p)
}

/// Kept-label mass `1 - q_i` at `y_i`, flip mass `q_i` spread over the other
/// classes by a softmax of the random linear scores.
fn flip_distribution(scores: &DMatrix<f64>, yi: usize, q: f64, row: usize) -> Vec<f64> {
    let k = scores.ncols();
    let mut dist = vec![0.0; k];
    let m = (0..k)
        .filter(|&j| j != yi)
        .fold(f64::NEG_INFINITY, |a, j| a.max(scores[(row, j)]));
    let mut total = 0.0;
    for j in 0..k {
        if j != yi {
            let e = (scores[(row, j)] - m).exp();
            dist[j] = e;
            total += e;
        }
    }
    for (j, d) in dist.iter_mut().enumerate() {
        if j != yi {
            *d *= q / total;
        }
    }
    dist[yi] = 1.0 - q;
    dist
}

/// Instance-dependent noise driven by a random linear map from feature
/// space to label space: per-sample budgets from a truncated normal around
/// `noise_ratio`, flip targets from a softmax of `x W`.
pub fn make_feature_dependent_label_noise(
    x: &DMatrix<f64>,
    y: &[usize],
    n_classes: usize,
    noise_ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, CorruptionReport)> {
    check_labels(y, n_classes)?;
    if n_classes < 2 {
        return Err(Error::InvalidParameter(
            "feature-dependent noise needs at least 2 classes".into(),
        ));
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(
            "labels do not match feature rows".into(),
        ));
    }
    if !(0.0..1.0).contains(&noise_ratio) {
        return Err(Error::InvalidParameter(format!(
            "noise_ratio must be in [0, 1), got {noise_ratio}"
        )));
    }
    if noise_ratio == 0.0 {
        let report = CorruptionReport::from_labels(y, y, n_classes, seed);
        return Ok((y.to_vec(), report));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(x.ncols(), n_classes);
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            w[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let scores = x * &w;

    let budget = Normal::new(noise_ratio, 0.1)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut noisy = Vec::with_capacity(y.len());
    for (i, &yi) in y.iter().enumerate() {
        // Truncated normal via rejection.
        let q = loop {
            let v: f64 = budget.sample(&mut rng);
            if (0.0..=1.0).contains(&v) {
                break v;
            }
        };
        let dist = flip_distribution(&scores, yi, q, i);
        noisy.push(sample_categorical(&dist, rng.gen::<f64>()));
    }
    let report = CorruptionReport::from_labels(y, &noisy, n_classes, seed);
    Ok((noisy, report))
}

/// Stratified 0/1 quality flags with `round(fraction * n)` trusted samples;
/// classes the proportional quota would miss get one forced trusted sample.
pub fn stratified_quality_split(
    y: &[usize],
    n_classes: usize,
    trusted_fraction: f64,
    seed: u64,
) -> Result<Vec<u8>> {
    check_labels(y, n_classes)?;
    if !(0.0..1.0).contains(&trusted_fraction) || trusted_fraction <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "trusted_fraction must be in (0, 1), got {trusted_fraction}"
        )));
    }
    let n = y.len();
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &yi) in y.iter().enumerate() {
        per_class[yi].push(i);
    }
    let total = ((trusted_fraction * n as f64).round() as usize).clamp(1, n);
    let targets: Vec<f64> = per_class
        .iter()
        .map(|members| trusted_fraction * members.len() as f64)
        .collect();
    let mut quotas = largest_remainder(&targets, total);
    for (class, members) in per_class.iter().enumerate() {
        if !members.is_empty() && quotas[class] == 0 {
            quotas[class] = 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quality = vec![0u8; n];
    for (class, members) in per_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for &i in shuffled.iter().take(quotas[class]) {
            quality[i] = 1;
        }
    }
    Ok(quality)
}

/// Keeps true labels on a stratified trusted subset, fits `learner` on it,
/// and relabels the rest with the learner's hard predictions.
pub fn make_weak_labels(
    x: &DMatrix<f64>,
    y: &[usize],
    n_classes: usize,
    trusted_fraction: f64,
    learner: &dyn Learner,
    seed: u64,
) -> Result<BiqualityDataset> {
    let quality = stratified_quality_split(y, n_classes, trusted_fraction, seed)?;
    let trusted: Vec<usize> = (0..y.len()).filter(|&i| quality[i] == 1).collect();
    let untrusted: Vec<usize> = (0..y.len()).filter(|&i| quality[i] == 0).collect();

    let mut labels = y.to_vec();
    if !untrusted.is_empty() {
        let xt = x.select_rows(trusted.iter());
        let yt: Vec<usize> = trusted.iter().map(|&i| y[i]).collect();
        let model = learner.fit_unweighted(&xt, &yt, n_classes)?;
        let preds = model.predict(&x.select_rows(untrusted.iter()))?;
        for (&i, &p) in untrusted.iter().zip(&preds) {
            labels[i] = p;
        }
    }
    BiqualityDataset::new(x.clone(), labels, quality, n_classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImbalanceMode {
    /// Subsample without replacement; keeps the largest feasible total size.
    Undersample,
    /// Duplicate with replacement; never drops an original sample.
    Oversample,
}

impl ImbalanceMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "undersample" => Ok(ImbalanceMode::Undersample),
            "oversample" => Ok(ImbalanceMode::Oversample),
            other => Err(Error::InvalidParameter(format!(
                "unknown imbalance mode {other:?}"
            ))),
        }
    }
}

/// Row indices resampled so the empirical class distribution matches
/// `target` within one sample per class. Largest-remainder rounding keeps
/// totals exact.
pub fn make_imbalance(
    y: &[usize],
    n_classes: usize,
    target: &[f64],
    mode: ImbalanceMode,
    seed: u64,
) -> Result<Vec<usize>> {
    check_labels(y, n_classes)?;
    if target.len() != n_classes {
        return Err(Error::DimensionMismatch(format!(
            "target distribution has {} entries for {} classes",
            target.len(),
            n_classes
        )));
    }
    if target.iter().any(|&p| !(0.0..=1.0).contains(&p))
        || (target.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidParameter(
            "target distribution must be a simplex over the classes".into(),
        ));
    }
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &yi) in y.iter().enumerate() {
        per_class[yi].push(i);
    }
    let counts: Vec<usize> = per_class.iter().map(Vec::len).collect();

    let quotas = match mode {
        ImbalanceMode::Undersample => {
            for c in 0..n_classes {
                if target[c] > 0.0 && counts[c] == 0 {
                    return Err(Error::NotEnoughSamples {
                        requested: 1,
                        available: 0,
                    });
                }
            }
            let upper = (0..n_classes)
                .filter(|&c| target[c] > 0.0)
                .map(|c| (counts[c] as f64 / target[c]).floor() as usize)
                .min()
                .unwrap_or(0);
            let mut found = None;
            let mut size = upper + 1;
            loop {
                let targets: Vec<f64> = target.iter().map(|&p| p * size as f64).collect();
                let q = largest_remainder(&targets, size);
                if q.iter().zip(&counts).all(|(&q, &n)| q <= n) {
                    found = Some(q);
                    break;
                }
                if size == 0 {
                    break;
                }
                size -= 1;
            }
            found.ok_or(Error::NotEnoughSamples {
                requested: upper,
                available: 0,
            })?
        }
        ImbalanceMode::Oversample => {
            for c in 0..n_classes {
                if counts[c] > 0 && target[c] <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "oversample cannot keep class {c} at target probability 0"
                    )));
                }
            }
            let lower = (0..n_classes)
                .filter(|&c| counts[c] > 0)
                .map(|c| (counts[c] as f64 / target[c]).ceil() as usize)
                .max()
                .unwrap_or(y.len());
            let mut size = lower.saturating_sub(2).max(y.len());
            loop {
                let targets: Vec<f64> = target.iter().map(|&p| p * size as f64).collect();
                let q = largest_remainder(&targets, size);
                if q.iter().zip(&counts).all(|(&q, &n)| q >= n) {
                    break q;
                }
                size += 1;
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (class, members) in per_class.iter().enumerate() {
        match mode {
            ImbalanceMode::Undersample => {
                let mut shuffled = members.clone();
                shuffled.shuffle(&mut rng);
                shuffled.truncate(quotas[class]);
                shuffled.sort_unstable();
                out.extend(shuffled);
            }
            ImbalanceMode::Oversample => {
                out.extend(members.iter().copied());
                for _ in counts[class]..quotas[class] {
                    out.push(members[rng.gen_range(0..members.len())]);
                }
            }
        }
    }
    Ok(out)
}

/// Largest-remainder rounding of real targets to integers summing `total`.
fn largest_remainder(targets: &[f64], total: usize) -> Vec<usize> {
    let mut quotas: Vec<usize> = targets.iter().map(|&t| t.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let deficit = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().take(deficit) {
        quotas[c] += 1;
    }
    quotas
}

/// Selects `target_size` row indices (without replacement, returned sorted)
/// with density proportional to a Gaussian over the first principal
/// component, mean shifted by `shift` standard deviations and spread scaled
/// by `scale`.
pub fn make_sampling_bias(
    x: &DMatrix<f64>,
    shift: f64,
    scale: f64,
    target_size: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::NotEnoughSamples {
            requested: 2,
            available: n,
        });
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    if target_size > n {
        return Err(Error::NotEnoughSamples {
            requested: target_size,
            available: n,
        });
    }

    let projection = first_principal_projection(x);
    let mean = projection.sum() / n as f64;
    let sd = (projection.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>()
        / (n - 1) as f64)
        .sqrt();

    let weights: Vec<f64> = if sd > 0.0 {
        let target_mean = mean + shift * sd;
        let denom = 2.0 * (scale * sd) * (scale * sd);
        projection
            .iter()
            .map(|z| (-(z - target_mean) * (z - target_mean) / denom).exp())
            .collect()
    } else {
        vec![1.0; n]
    };

    // Weighted sampling without replacement (exponential-key method):
    // take the top target_size keys ln(u_i) / w_i.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let key = if w > 0.0 {
                u.ln() / w
            } else {
                f64::NEG_INFINITY
            };
            (key, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut selected: Vec<usize> = keyed.iter().take(target_size).map(|&(_, i)| i).collect();
    selected.sort_unstable();
    Ok(selected)
}

/// Alias preserving the spelling used by existing benchmark configs.
pub use make_sampling_bias as make_sampling_biais;

/// Mean-centered projection onto the leading covariance eigenvector, with
/// the sign fixed so the largest-magnitude loading is positive.
fn first_principal_projection(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows() as f64;
    let mut centered = x.clone();
    for c in 0..x.ncols() {
        let mean = x.column(c).sum() / n;
        for r in 0..x.nrows() {
            centered[(r, c)] -= mean;
        }
    }
    let cov = centered.transpose() * &centered / (n - 1.0);
    let eigen = SymmetricEigen::new(cov);
    let mut lead = 0;
    for i in 1..eigen.eigenvalues.len() {
        if eigen.eigenvalues[i] > eigen.eigenvalues[lead] {
            lead = i;
        }
    }
    let mut direction = eigen.eigenvectors.column(lead).clone_owned();
    let mut top = 0;
    for i in 1..direction.len() {
        if direction[i].abs() > direction[top].abs() {
            top = i;
        }
    }
    if direction[top] < 0.0 {
        direction = -direction;
    }
    &centered * direction
}

/// Isotropic Gaussian blobs, one center per class; handy for examples and
/// benchmark smoke data.
pub fn make_gaussian_blobs(
    n_per_class: &[usize],
    centers: &[Vec<f64>],
    std_dev: f64,
    seed: u64,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if centers.is_empty() || n_per_class.len() != centers.len() {
        return Err(Error::InvalidParameter(
            "need one center per class".into(),
        ));
    }
    let d = centers[0].len();
    if d == 0 || centers.iter().any(|c| c.len() != d) {
        return Err(Error::DimensionMismatch(
            "centers must share a positive dimension".into(),
        ));
    }
    if !(std_dev >= 0.0) {
        return Err(Error::InvalidParameter("std_dev must be nonnegative".into()));
    }
    let total: usize = n_per_class.iter().sum();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(total, d);
    let mut y = Vec::with_capacity(total);
    let mut row = 0;
    for (class, (&count, center)) in n_per_class.iter().zip(centers).enumerate() {
        for _ in 0..count {
            for c in 0..d {
                let noise: f64 = rng.sample(StandardNormal);
                x[(row, c)] = center[c] + std_dev * noise;
            }
            y.push(class);
            row += 1;
        }
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::LogisticRegression;
    use nalgebra::dmatrix;

    #[test]
    fn identity_noise_changes_nothing() {
        let y = vec![0, 1, 2, 1, 0];
        let (noisy, report) = make_label_noise(&y, &NoiseMatrix::identity(3), 7).unwrap();
        assert_eq!(noisy, y);
        assert_eq!(report.n_corrupted, 0);
        assert_eq!(report.realized_noise_ratio, 0.0);
    }

    #[test]
    fn permutation_noise_flips_everything() {
        let m = NoiseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let y = vec![0, 1, 0, 1];
        let (noisy, report) = make_label_noise(&y, &m, 3).unwrap();
        assert_eq!(noisy, vec![1, 0, 1, 0]);
        assert_eq!(report.n_corrupted, 4);
    }

    #[test]
    fn symmetric_noise_concentrates_near_target() {
        let m = NoiseMatrix::from_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let y: Vec<usize> = (0..10_000).map(|i| i % 2).collect();
        let (_, report) = make_label_noise(&y, &m, 42).unwrap();
        let ratio = report.realized_noise_ratio;
        assert!((0.27..=0.33).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn report_ratio_matches_recomputed_disagreement() {
        let m = NoiseMatrix::uniform_noise(3, 0.4).unwrap();
        let y: Vec<usize> = (0..999).map(|i| i % 3).collect();
        let (noisy, report) = make_label_noise(&y, &m, 11).unwrap();
        let disagree = y.iter().zip(&noisy).filter(|(a, b)| a != b).count();
        assert_eq!(report.n_corrupted, disagree);
        assert!((report.realized_noise_ratio - disagree as f64 / 999.0).abs() < 1e-15);
    }

    #[test]
    fn instance_noise_zero_probability_is_identity() {
        let m = NoiseMatrix::uniform_noise(2, 0.5).unwrap();
        let y = vec![0, 1, 1, 0];
        let (noisy, _) = make_instance_dependent_label_noise(&y, &[0.0; 4], &m, 5).unwrap();
        assert_eq!(noisy, y);
    }

    #[test]
    fn instance_noise_forced_flip_on_binary() {
        let m = NoiseMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let y = vec![0, 1, 0];
        let (noisy, _) = make_instance_dependent_label_noise(&y, &[1.0; 3], &m, 5).unwrap();
        assert_eq!(noisy, vec![1, 0, 1]);
    }

    #[test]
    fn instance_noise_rejects_zero_off_diagonal() {
        let m = NoiseMatrix::identity(2);
        let err =
            make_instance_dependent_label_noise(&[0, 1], &[0.5, 0.0], &m, 1).unwrap_err();
        assert!(matches!(err, Error::ZeroOffDiagonalMass { class: 0 }));
    }

    #[test]
    fn instance_noise_binomial_scale() {
        let m = NoiseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let n = 10_000;
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let mut p = vec![0.0; n];
        for v in p.iter_mut().take(n / 2) {
            *v = 0.5;
        }
        let (_, report) = make_instance_dependent_label_noise(&y, &p, &m, 99).unwrap();
        let c = report.n_corrupted as i64;
        assert!((c - 2_500).abs() <= 150, "corrupted {c}");
    }

    struct FixedProba(f64);
    impl Classifier for FixedProba {
        fn n_classes(&self) -> usize {
            2
        }
        fn predict_proba(&self, x: &DMatrix<f64>) -> crate::error::Result<DMatrix<f64>> {
            Ok(DMatrix::from_fn(x.nrows(), 2, |_, j| {
                if j == 0 {
                    self.0
                } else {
                    1.0 - self.0
                }
            }))
        }
    }

    #[test]
    fn uncertainty_uniform_model_gives_flat_probabilities() {
        let x = DMatrix::zeros(8, 1);
        let y = vec![0; 8];
        let p = uncertainty_noise_probability(&x, &y, &FixedProba(0.5), 0.3).unwrap();
        for v in p {
            assert!((v - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn uncertainty_zero_target_gives_zero() {
        let x = DMatrix::zeros(4, 1);
        let y = vec![0; 4];
        let p = uncertainty_noise_probability(&x, &y, &FixedProba(1.0), 0.0).unwrap();
        assert_eq!(p, vec![0.0; 4]);
    }

    #[test]
    fn uncertainty_mean_matches_target_on_mixed_scores() {
        let (x, y) = make_gaussian_blobs(&[60, 60], &[vec![-1.0], vec![1.0]], 1.0, 3).unwrap();
        let model = LogisticRegression::default()
            .fit_unweighted(&x, &y, 2)
            .unwrap();
        let p = uncertainty_noise_probability(&x, &y, model.as_ref(), 0.3).unwrap();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((mean - 0.3).abs() <= 1e-6, "mean {mean}");
    }

    #[test]
    fn feature_noise_zero_ratio_is_identity() {
        let x = dmatrix![1.0, 0.0; 0.0, 1.0];
        let (noisy, report) =
            make_feature_dependent_label_noise(&x, &[0, 1], 2, 0.0, 9).unwrap();
        assert_eq!(noisy, vec![0, 1]);
        assert_eq!(report.n_corrupted, 0);
    }

    #[test]
    fn identical_features_share_flip_distribution() {
        let x = dmatrix![0.4, -1.0; 0.4, -1.0; 2.0, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut w = DMatrix::zeros(2, 3);
        for i in 0..2 {
            for j in 0..3 {
                w[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let scores = &x * &w;
        let a = flip_distribution(&scores, 1, 0.4, 0);
        let b = flip_distribution(&scores, 1, 0.4, 1);
        assert_eq!(a, b);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((a[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn feature_noise_is_seed_deterministic() {
        let (x, y) = make_gaussian_blobs(&[50, 50], &[vec![-1.0, 0.0], vec![1.0, 0.0]], 1.0, 4)
            .unwrap();
        let (a, _) = make_feature_dependent_label_noise(&x, &y, 2, 0.3, 17).unwrap();
        let (b, _) = make_feature_dependent_label_noise(&x, &y, 2, 0.3, 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weak_labels_on_separable_task_stay_accurate() {
        let (x, y) =
            make_gaussian_blobs(&[200, 200], &[vec![-4.0, 0.0], vec![4.0, 0.0]], 1.0, 8).unwrap();
        let ds =
            make_weak_labels(&x, &y, 2, 0.2, &LogisticRegression::default(), 21).unwrap();
        let untrusted = ds.untrusted_indices();
        let correct = untrusted
            .iter()
            .filter(|&&i| ds.labels()[i] == y[i])
            .count();
        let accuracy = correct as f64 / untrusted.len() as f64;
        assert!(accuracy >= 0.95, "untrusted label accuracy {accuracy}");
        let quality_mean = ds.n_trusted() as f64 / ds.n_samples() as f64;
        assert!((quality_mean - 0.2).abs() <= 1.0 / ds.n_samples() as f64 + 1e-12);
    }

    #[test]
    fn weak_labels_boundary_fraction() {
        let (x, y) = make_gaussian_blobs(&[5, 5], &[vec![-3.0], vec![3.0]], 0.5, 2).unwrap();
        let ds =
            make_weak_labels(&x, &y, 2, 0.9, &LogisticRegression::default(), 3).unwrap();
        assert_eq!(ds.n_untrusted(), 1);
    }

    #[test]
    fn weak_labels_forces_missing_class_into_trusted() {
        // Class 1 has 2 of 52 samples: a 10% stratified quota would give 0.
        let (x, y) = make_gaussian_blobs(&[50, 2], &[vec![-3.0], vec![3.0]], 0.5, 2).unwrap();
        let ds = make_weak_labels(&x, &y, 2, 0.1, &LogisticRegression::default(), 3).unwrap();
        let trusted_class1 = ds
            .trusted_indices()
            .iter()
            .filter(|&&i| y[i] == 1)
            .count();
        assert!(trusted_class1 >= 1);
    }

    #[test]
    fn imbalance_fixed_point_keeps_everything() {
        let y: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let idx = make_imbalance(
            &y,
            3,
            &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            ImbalanceMode::Undersample,
            6,
        )
        .unwrap();
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..300).collect::<Vec<_>>());
    }

    #[test]
    fn imbalance_undersample_matches_hand_rounding() {
        let y: Vec<usize> = (0..1000).map(|i| i % 2).collect();
        let idx = make_imbalance(&y, 2, &[0.9, 0.1], ImbalanceMode::Undersample, 6).unwrap();
        let c0 = idx.iter().filter(|&&i| y[i] == 0).count();
        let c1 = idx.iter().filter(|&&i| y[i] == 1).count();
        assert_eq!((c0, c1), (500, 56));
    }

    #[test]
    fn imbalance_oversample_never_drops_samples() {
        let y: Vec<usize> = (0..90).map(|i| if i < 60 { 0 } else { 1 }).collect();
        let idx = make_imbalance(&y, 2, &[0.5, 0.5], ImbalanceMode::Oversample, 6).unwrap();
        for original in 0..90 {
            assert!(idx.contains(&original), "sample {original} dropped");
        }
        let c0 = idx.iter().filter(|&&i| y[i] == 0).count();
        let c1 = idx.iter().filter(|&&i| y[i] == 1).count();
        assert!((c0 as i64 - c1 as i64).abs() <= 1);
    }

    #[test]
    fn sampling_bias_full_draw_returns_all_indices() {
        let (x, _) = make_gaussian_blobs(&[20], &[vec![0.0, 0.0]], 1.0, 5).unwrap();
        let idx = make_sampling_bias(&x, 0.0, 1.0, 20, 9).unwrap();
        assert_eq!(idx, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn sampling_bias_shift_moves_selection_mean() {
        let (x, _) = make_gaussian_blobs(&[2000], &[vec![0.0, 0.0]], 1.0, 12).unwrap();
        let idx = make_sampling_bias(&x, 2.0, 1.0, 200, 13).unwrap();
        let projection = first_principal_projection(&x);
        let mu = projection.sum() / 2000.0;
        let sd = (projection.iter().map(|z| (z - mu) * (z - mu)).sum::<f64>() / 1999.0).sqrt();
        let selected_mean =
            idx.iter().map(|&i| projection[i]).sum::<f64>() / idx.len() as f64;
        assert!(
            selected_mean > mu + 0.5 * sd,
            "selected mean {selected_mean} vs mu {mu}, sd {sd}"
        );
    }

    #[test]
    fn sampling_bias_is_deterministic_and_bounded() {
        let (x, _) = make_gaussian_blobs(&[50], &[vec![0.0]], 1.0, 5).unwrap();
        let a = make_sampling_bias(&x, 1.0, 0.5, 10, 3).unwrap();
        let b = make_sampling_biais(&x, 1.0, 0.5, 10, 3).unwrap();
        assert_eq!(a, b);
        assert!(make_sampling_bias(&x, 0.0, 1.0, 51, 3).is_err());
    }
}
