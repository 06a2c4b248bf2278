//! Descending eigenvalue spectra and the Stieltjes-derivative statistics.
//!
//! Indices `j` in this module are 1-based: `j = 1` refers to the largest
//! eigenvalue, and the "bulk" beyond index `j` is `lambda_{j+1}, ..., lambda_p`.

use serde::Serialize;

use crate::corrmat::{CorrMatrix, MatrixKind};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    source_kind: MatrixKind,
    n: usize,
    p: usize,
}

impl Spectrum {
    /// Wraps an externally computed spectrum, sorting it descending.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, source_kind: MatrixKind, n: usize) -> Result<Self> {
        if let Some(i) = eigenvalues.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateSpectrum(format!("eigenvalue {i} is not finite")));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let p = eigenvalues.len();
        Ok(Self { eigenvalues, source_kind, n, p })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `lambda_j` with 1-based `j`.
    pub fn lambda(&self, j: usize) -> f64 {
        self.eigenvalues[j - 1]
    }

    pub fn source_kind(&self) -> MatrixKind {
        self.source_kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    fn check_bulk_index(&self, j: usize) -> Result<()> {
        if j == 0 || j >= self.p {
            return Err(Error::InvalidParameter(format!(
                "bulk index j must satisfy 1 <= j <= p - 1 = {}, got {j}",
                self.p.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

/// All eigenvalues of a symmetric matrix, descending. Eigenvectors are not
/// kept.
pub fn eigen_sym(m: &CorrMatrix) -> Result<Spectrum> {
    let eig = symmetric_eigen(m.values(), false)?;
    let p = eig.values.len();
    Ok(Spectrum { eigenvalues: eig.values, source_kind: m.kind(), n: m.n_obs(), p })
}

/// `(1/(p-j)) * sum_{l>j} 1/(x - lambda_l)^2`.
///
/// Errors with [`Error::Divergent`] when `x` coincides with a bulk
/// eigenvalue or the sum overflows.
pub fn m_hat_prime(s: &Spectrum, j: usize, x: f64) -> Result<f64> {
    s.check_bulk_index(j)?;
    let mut total = 0.0;
    for (idx, &l) in s.eigenvalues.iter().enumerate().skip(j) {
        let d = x - l;
        if d == 0.0 {
            return Err(Error::Divergent { x, index: idx + 1 });
        }
        total += 1.0 / (d * d);
    }
    let v = total / (s.p - j) as f64;
    if !v.is_finite() {
        return Err(Error::Divergent { x, index: j + 1 });
    }
    Ok(v)
}

/// Regularized statistic `(1/(p-j)) * sum_{l>j} 1/((lambda_j - lambda_l)^2 + p^{-4/3})`.
/// Always finite and bounded by `p^{4/3}`.
pub fn m_tilde_prime(s: &Spectrum, j: usize) -> Result<f64> {
    s.check_bulk_index(j)?;
    let reg = (s.p as f64).powf(-4.0 / 3.0);
    let lj = s.lambda(j);
    let total: f64 = s.eigenvalues[j..].iter().map(|&l| 1.0 / ((lj - l).powi(2) + reg)).sum();
    Ok(total / (s.p - j) as f64)
}
