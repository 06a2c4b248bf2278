use super::{Diagnostics, EstimateResult, Method};
use crate::corrmat::{covariance, DataMatrix};
use crate::error::{Error, Result};
use crate::spectra::{eigen_sym, Spectrum};

/// NE estimate on the sample covariance matrix (divisor `n`).
pub fn estimate_ne(data: &DataMatrix) -> Result<EstimateResult> {
    let s = eigen_sym(&covariance(data)?)?;
    ne_from_spectrum(&s)
}

/// `argmin_{0 <= j < min(p, n)} (n/p)^2 t_j^2 / 4 + 2(j + 1)`.
///
/// Tails whose eigenvalue sum is below `1e-10` of the trace (the null space
/// of a rank-deficient covariance) get an infinite objective.
pub fn ne_from_spectrum(s: &Spectrum) -> Result<EstimateResult> {
    let (p, n) = (s.p(), s.n());
    let lambda = s.eigenvalues();
    let total: f64 = lambda.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::DegenerateSpectrum("sample covariance has zero trace".into()));
    }
    let (pf, nf) = (p as f64, n as f64);
    let q = p.min(n);
    let mut t = Vec::with_capacity(q);
    let mut objective = Vec::with_capacity(q);
    for j in 0..q {
        let tail = &lambda[j..];
        let s1: f64 = tail.iter().map(|l| l.max(0.0)).sum();
        if s1 <= 1e-10 * total {
            t.push(f64::NAN);
            objective.push(f64::INFINITY);
            continue;
        }
        let s2: f64 = tail.iter().map(|l| l * l).sum();
        let tj = pf * ((pf - j as f64) * s2 / (s1 * s1) - 1.0 - pf / nf) - pf / nf;
        t.push(tj);
        objective.push(0.25 * (nf / pf).powi(2) * tj * tj + 2.0 * (j + 1) as f64);
    }
    let mut k_hat = 0;
    for (j, &o) in objective.iter().enumerate() {
        if o < objective[k_hat] {
            k_hat = j;
        }
    }
    Ok(EstimateResult { method: Method::Ne, k_hat, k_max: q - 1, diagnostics: Diagnostics::Ne { t, objective } })
}
