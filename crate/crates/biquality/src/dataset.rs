//! The biquality data model: features, labels and a per-sample trust indicator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A dataset whose samples are split into a trusted part (`sample_quality = 1`,
/// cleanly labeled and representative) and an untrusted part (`sample_quality = 0`,
/// possibly mislabeled and/or shifted). All algorithms in this crate consume the
/// two parts as one global dataset.
#[derive(Debug, Clone)]
pub struct BiqualityDataset {
    features: DMatrix<f64>,
    labels: Vec<usize>,
    sample_quality: Vec<u8>,
    n_classes: usize,
}

/// Counts reported by dataset validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSummary {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_trusted: usize,
    pub n_untrusted: usize,
    pub n_classes: usize,
}

impl BiqualityDataset {
    /// Builds a dataset, validating every invariant: matching lengths,
    /// quality flags in {0, 1}, labels below `n_classes`.
    ///
    /// An empty trusted subset is allowed here; algorithms that need trusted
    /// samples call [`BiqualityDataset::require_trusted`] before fitting.
    pub fn new(
        features: DMatrix<f64>,
        labels: Vec<usize>,
        sample_quality: Vec<u8>,
        n_classes: usize,
    ) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != n || sample_quality.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "features have {} rows but labels have {} and sample_quality {}",
                n,
                labels.len(),
                sample_quality.len()
            )));
        }
        if n_classes == 0 {
            return Err(Error::InvalidParameter("n_classes must be positive".into()));
        }
        for &q in &sample_quality {
            if q > 1 {
                return Err(Error::InvalidQuality(q.to_string()));
            }
        }
        for &y in &labels {
            if y >= n_classes {
                return Err(Error::LabelOutOfRange {
                    label: y,
                    n_classes,
                });
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features".into()));
        }
        Ok(Self {
            features,
            labels,
            sample_quality,
            n_classes,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sample_quality(&self) -> &[u8] {
        &self.sample_quality
    }

    pub fn trusted_indices(&self) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.sample_quality[i] == 1)
            .collect()
    }

    pub fn untrusted_indices(&self) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.sample_quality[i] == 0)
            .collect()
    }

    pub fn n_trusted(&self) -> usize {
        self.sample_quality.iter().filter(|&&q| q == 1).count()
    }

    pub fn n_untrusted(&self) -> usize {
        self.n_samples() - self.n_trusted()
    }

    /// Errors unless at least one sample is trusted.
    pub fn require_trusted(&self) -> Result<()> {
        if self.n_trusted() == 0 {
            Err(Error::EmptyTrustedSet)
        } else {
            Ok(())
        }
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            n_samples: self.n_samples(),
            n_features: self.n_features(),
            n_trusted: self.n_trusted(),
            n_untrusted: self.n_untrusted(),
            n_classes: self.n_classes,
        }
    }

    /// Row subset (indices may repeat, which duplicates samples).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= self.n_samples() {
                return Err(Error::DimensionMismatch(format!(
                    "index {} out of bounds for {} samples",
                    i,
                    self.n_samples()
                )));
            }
        }
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            features: self.features.select_rows(indices.iter()),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sample_quality: indices.iter().map(|&i| self.sample_quality[i]).collect(),
            n_classes: self.n_classes,
        })
    }
}

/// Validates a dataset built from raw parts and reports its counts.
///
/// This is the same check run by [`BiqualityDataset::new`]; it exists so
/// callers holding raw arrays can validate without an extra clone dance.
pub fn validate_dataset(ds: BiqualityDataset) -> Result<(BiqualityDataset, DatasetSummary)> {
    // Invariants were enforced at construction; re-derive the summary.
    let summary = ds.summary();
    Ok((ds, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn features4() -> DMatrix<f64> {
        dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 6.0; 7.0, 8.0]
    }

    #[test]
    fn valid_dataset_reports_counts() {
        let ds =
            BiqualityDataset::new(features4(), vec![0, 1, 0, 1], vec![1, 1, 0, 0], 2).unwrap();
        let s = ds.summary();
        assert_eq!(s.n_trusted, 2);
        assert_eq!(s.n_untrusted, 2);
        assert_eq!(s.n_classes, 2);
        assert_eq!(ds.trusted_indices(), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_quality_flag() {
        let err = BiqualityDataset::new(
            dmatrix![1.0; 2.0; 3.0],
            vec![0, 1, 0],
            vec![1, 2, 0],
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidQuality(_)), "{err}");
    }

    #[test]
    fn rejects_label_out_of_range() {
        let err = BiqualityDataset::new(dmatrix![1.0; 2.0], vec![0, 3], vec![1, 0], 2).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { label: 3, n_classes: 2 }), "{err}");
    }

    #[test]
    fn rejects_length_mismatch() {
        let err =
            BiqualityDataset::new(features4(), vec![0, 1, 0], vec![1, 1, 0, 0], 2).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn subset_gathers_rows() {
        let ds =
            BiqualityDataset::new(features4(), vec![0, 1, 0, 1], vec![1, 1, 0, 0], 2).unwrap();
        let sub = ds.subset(&[2, 0]).unwrap();
        assert_eq!(sub.labels(), &[0, 0]);
        assert_eq!(sub.sample_quality(), &[0, 1]);
        assert_eq!(sub.features()[(0, 0)], 5.0);
    }

    #[test]
    fn empty_trusted_is_constructible_but_flagged() {
        let ds = BiqualityDataset::new(features4(), vec![0, 1, 0, 1], vec![0, 0, 0, 0], 2).unwrap();
        assert!(ds.require_trusted().is_err());
    }
}
