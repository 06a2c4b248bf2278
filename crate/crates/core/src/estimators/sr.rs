use super::{argmax_first, Diagnostics, EstimateResult, Method};
use crate::corrmat::{spearman, DataMatrix, TiePolicy};
use crate::error::{Error, Result};
use crate::spectra::{eigen_sym, m_tilde_prime, Spectrum};

/// Stieltjes-ratio estimate on the Spearman matrix with midrank ties.
pub fn estimate_sr(data: &DataMatrix, k_max: usize) -> Result<EstimateResult> {
    estimate_sr_with(data, k_max, TiePolicy::Midrank)
}

pub fn estimate_sr_with(data: &DataMatrix, k_max: usize, tie_policy: TiePolicy) -> Result<EstimateResult> {
    check_k_max(k_max, data.n_vars())?;
    let s = eigen_sym(&spearman(data, tie_policy)?)?;
    sr_from_spectrum(&s, k_max)
}

fn check_k_max(k_max: usize, p: usize) -> Result<()> {
    if k_max < 2 || k_max + 2 > p {
        return Err(Error::InvalidParameter(format!("SR needs 2 <= k_max <= p - 2, got k_max = {k_max}, p = {p}")));
    }
    Ok(())
}

/// `argmax_{1 <= j <= k_max} m~'_{j+1} / m~'_j`.
pub fn sr_from_spectrum(s: &Spectrum, k_max: usize) -> Result<EstimateResult> {
    check_k_max(k_max, s.p())?;
    let m_tilde = (1..=k_max + 1).map(|j| m_tilde_prime(s, j)).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = m_tilde.windows(2).map(|w| w[1] / w[0]).collect();
    let k_hat = argmax_first(&ratios).map_or(0, |i| i + 1);
    Ok(EstimateResult { method: Method::Sr, k_hat, k_max, diagnostics: Diagnostics::Sr { ratios, m_tilde } })
}
