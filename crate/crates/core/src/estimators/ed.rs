use super::{Diagnostics, EstimateResult, Method};
use crate::corrmat::{covariance, DataMatrix};
use crate::error::{Error, Result};
use crate::spectra::{eigen_sym, Spectrum};

pub const ED_MAX_ITERATIONS: usize = 50;

/// Eigenvalue-difference estimate on the sample covariance matrix.
pub fn estimate_ed(data: &DataMatrix, k_max: usize) -> Result<EstimateResult> {
    check_k_max(k_max, data.n_vars(), data.n_obs())?;
    let s = eigen_sym(&covariance(data)?)?;
    ed_from_spectrum(&s, k_max)
}

fn check_k_max(k_max: usize, p: usize, n: usize) -> Result<()> {
    if k_max == 0 || k_max + 5 >= p.min(n) {
        return Err(Error::InvalidParameter(format!(
            "ED needs 1 <= k_max and k_max + 5 < min(p, n), got k_max = {k_max}, p = {p}, n = {n}"
        )));
    }
    Ok(())
}

/// `max{1 <= j <= k_max : lambda_j - lambda_{j+1} >= delta}`, 0 if empty.
///
/// `delta` is calibrated iteratively: regress `lambda_j..lambda_{j+4}` on
/// `(j-1)^{2/3}..(j+3)^{2/3}` with an intercept, set `delta = 2|slope|`,
/// recount, restart from `j = K^ + 1`, and stop once `K^` repeats. Starts at
/// `j = k_max + 1`; after 50 rounds the last iterate is kept with
/// `converged = false`.
pub fn ed_from_spectrum(s: &Spectrum, k_max: usize) -> Result<EstimateResult> {
    check_k_max(k_max, s.p(), s.n())?;
    let lambda = s.eigenvalues();
    let gaps: Vec<f64> = (0..k_max).map(|i| lambda[i] - lambda[i + 1]).collect();
    let count = |delta: f64| gaps.iter().rposition(|&g| g >= delta).map_or(0, |i| i + 1);

    let mut j = k_max + 1;
    let mut delta = calibrate(lambda, j);
    let mut k_hat = count(delta);
    let mut iterations = 1;
    let mut converged = false;
    while iterations < ED_MAX_ITERATIONS {
        j = k_hat + 1;
        delta = calibrate(lambda, j);
        let next = count(delta);
        iterations += 1;
        if next == k_hat {
            converged = true;
            break;
        }
        k_hat = next;
    }
    Ok(EstimateResult {
        method: Method::Ed,
        k_hat,
        k_max,
        diagnostics: Diagnostics::Ed { delta, gaps, iterations, converged },
    })
}

/// `2 |slope|` of the OLS fit of `lambda_j..lambda_{j+4}` (1-based) on
/// `(j-1)^{2/3}..(j+3)^{2/3}`.
fn calibrate(lambda: &[f64], j: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (0..5).map(|i| (((j - 1 + i) as f64).powf(2.0 / 3.0), lambda[j - 1 + i])).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 5.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 5.0;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    2.0 * (sxy / sxx).abs()
}
