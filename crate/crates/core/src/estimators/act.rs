use super::{Diagnostics, EstimateResult, Method};
use crate::corrmat::{pearson, DataMatrix};
use crate::error::{Error, Result};
use crate::spectra::{eigen_sym, Spectrum};

/// Bias-corrected threshold estimate on the Pearson correlation matrix.
pub fn estimate_act(data: &DataMatrix, k_max: usize) -> Result<EstimateResult> {
    check(k_max, data.n_vars(), data.n_obs())?;
    let s = eigen_sym(&pearson(data)?)?;
    act_from_spectrum(&s, k_max)
}

fn check(k_max: usize, p: usize, n: usize) -> Result<()> {
    if k_max == 0 || k_max + 1 >= p {
        return Err(Error::InvalidParameter(format!("ACT needs 1 <= k_max and k_max + 1 < p, got k_max = {k_max}, p = {p}")));
    }
    if n < 3 {
        return Err(Error::TooFewObservations { got: n, min: 3 });
    }
    Ok(())
}

/// `max{1 <= j <= k_max : alpha^_j > 1 + sqrt(p/(n-1))}`, 0 if empty, with
/// `alpha^_j = -1 / m_j` and
/// `m_j = -(1 - c_j)/lambda_j + c_j/(p-j) [sum_{l>j} 1/(lambda_l - lambda_j) + 1/((3 lambda_j + lambda_{j+1})/4 - lambda_j)]`,
/// `c_j = (p-j)/(n-1)`. Indices where a denominator vanishes get `None` and
/// are excluded.
pub fn act_from_spectrum(s: &Spectrum, k_max: usize) -> Result<EstimateResult> {
    check(k_max, s.p(), s.n())?;
    let (p, n) = (s.p(), s.n());
    let lambda = s.eigenvalues();
    let threshold = 1.0 + (p as f64 / (n - 1) as f64).sqrt();
    let alpha_hat: Vec<Option<f64>> = (1..=k_max)
        .map(|j| {
            let x = lambda[j - 1];
            let anchor = (3.0 * x + lambda[j]) / 4.0 - x;
            if anchor == 0.0 || x == 0.0 {
                return None;
            }
            let mut sum = 1.0 / anchor;
            for &l in &lambda[j..] {
                let d = l - x;
                if d == 0.0 {
                    return None;
                }
                sum += 1.0 / d;
            }
            let m = sum / (p - j) as f64;
            let c = (p - j) as f64 / (n - 1) as f64;
            let m_under = -(1.0 - c) / x + c * m;
            let a = -1.0 / m_under;
            (m_under != 0.0 && a.is_finite()).then_some(a)
        })
        .collect();
    let k_hat = alpha_hat.iter().rposition(|a| a.is_some_and(|a| a > threshold)).map_or(0, |i| i + 1);
    Ok(EstimateResult { method: Method::Act, k_hat, k_max, diagnostics: Diagnostics::Act { alpha_hat, threshold } })
}
