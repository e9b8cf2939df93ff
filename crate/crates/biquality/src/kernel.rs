//! Kernel functions and gram matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Kernel family plus hyperparameters.
///
/// A `gamma` of `None` is resolved from the data as
/// `1 / (n_features * var(X))` (over all matrix entries), falling back to
/// `1 / n_features` for constant data.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Rbf { gamma: Option<f64> },
    Linear,
    Polynomial {
        gamma: Option<f64>,
        degree: u32,
        coef0: f64,
    },
}

impl Kernel {
    pub fn rbf() -> Self {
        Kernel::Rbf { gamma: None }
    }

    pub fn rbf_with_gamma(gamma: f64) -> Self {
        Kernel::Rbf { gamma: Some(gamma) }
    }

    pub fn polynomial(degree: u32, coef0: f64) -> Self {
        Kernel::Polynomial {
            gamma: None,
            degree,
            coef0,
        }
    }

    /// Parses `"rbf"`, `"linear"` or `"polynomial"`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "rbf" => Ok(Kernel::rbf()),
            "linear" => Ok(Kernel::Linear),
            "polynomial" => Ok(Kernel::polynomial(3, 1.0)),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel {other:?} (expected rbf, linear or polynomial)"
            ))),
        }
    }

    /// Returns a copy with any unset `gamma` resolved against `reference`,
    /// so repeated gram computations use one consistent bandwidth.
    pub fn resolved_against(&self, reference: &DMatrix<f64>) -> Kernel {
        let fill = |gamma: &Option<f64>| Some(gamma.unwrap_or_else(|| scale_gamma(reference)));
        match self {
            Kernel::Rbf { gamma } => Kernel::Rbf { gamma: fill(gamma) },
            Kernel::Linear => Kernel::Linear,
            Kernel::Polynomial {
                gamma,
                degree,
                coef0,
            } => Kernel::Polynomial {
                gamma: fill(gamma),
                degree: *degree,
                coef0: *coef0,
            },
        }
    }

    /// Gram matrix with entry `(i, j) = k(a_i, b_j)`, rows(A) × rows(B).
    pub fn gram(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if a.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "kernel inputs have {} and {} columns",
                a.ncols(),
                b.ncols()
            )));
        }
        match self {
            Kernel::Rbf { gamma } => {
                let g = effective_gamma(gamma, a)?;
                let mut k = DMatrix::zeros(a.nrows(), b.nrows());
                for i in 0..a.nrows() {
                    for j in 0..b.nrows() {
                        let mut d2 = 0.0;
                        for c in 0..a.ncols() {
                            let d = a[(i, c)] - b[(j, c)];
                            d2 += d * d;
                        }
                        k[(i, j)] = (-g * d2).exp();
                    }
                }
                Ok(k)
            }
            Kernel::Linear => Ok(a * b.transpose()),
            Kernel::Polynomial {
                gamma,
                degree,
                coef0,
            } => {
                if *degree == 0 {
                    return Err(Error::InvalidParameter(
                        "polynomial degree must be positive".into(),
                    ));
                }
                let g = effective_gamma(gamma, a)?;
                let mut k = a * b.transpose();
                for v in k.iter_mut() {
                    *v = (g * *v + coef0).powi(*degree as i32);
                }
                Ok(k)
            }
        }
    }
}

fn effective_gamma(gamma: &Option<f64>, reference: &DMatrix<f64>) -> Result<f64> {
    let g = gamma.unwrap_or_else(|| scale_gamma(reference));
    if !(g > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive (got {g})"
        )));
    }
    Ok(g)
}

fn scale_gamma(x: &DMatrix<f64>) -> f64 {
    let n = (x.nrows() * x.ncols()) as f64;
    if n == 0.0 {
        return 1.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0 / x.ncols() as f64
    }
}
