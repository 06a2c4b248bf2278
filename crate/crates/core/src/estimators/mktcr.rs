use super::{argmax_first, Diagnostics, EstimateResult, Method};
use crate::corrmat::{mkendall, DataMatrix};
use crate::error::{Error, Result};
use crate::spectra::{eigen_sym, Spectrum};

/// Kendall's-tau ratio estimate on the multivariate Kendall's tau matrix.
pub fn estimate_mktcr(data: &DataMatrix, k_max: usize) -> Result<EstimateResult> {
    check_k_max(k_max, data.n_vars(), data.n_obs())?;
    let s = eigen_sym(&mkendall(data)?)?;
    mktcr_from_spectrum(&s, k_max)
}

fn check_k_max(k_max: usize, p: usize, n: usize) -> Result<()> {
    if k_max == 0 || k_max + 1 >= p.min(n) {
        return Err(Error::InvalidParameter(format!(
            "MKTCR needs 1 <= k_max and k_max + 1 < min(p, n), got k_max = {k_max}, p = {p}, n = {n}"
        )));
    }
    Ok(())
}

/// `argmax_{1 <= j <= k_max} ln(1 + lambda_j / V_{j-1}) / ln(1 + lambda_{j+1} / V_j)`
/// with `V_j = sum_{i=j+1}^{min(p,n)} lambda_i`.
pub fn mktcr_from_spectrum(s: &Spectrum, k_max: usize) -> Result<EstimateResult> {
    check_k_max(k_max, s.p(), s.n())?;
    let q = s.p().min(s.n());
    let lambda: Vec<f64> = s.eigenvalues()[..q].iter().map(|l| l.max(0.0)).collect();
    let total: f64 = lambda.iter().sum();
    // v[j] = V_j = lambda[j..].sum() for j = 0..=k_max, accumulated from the tail
    let mut v = vec![0.0; k_max + 1];
    let mut acc: f64 = lambda[k_max + 1..].iter().sum();
    for j in (0..=k_max).rev() {
        acc += lambda[j];
        v[j] = acc;
    }
    for (j, &vj) in v.iter().enumerate() {
        if vj.is_nan() || vj <= 1e-12 * total {
            return Err(Error::DegenerateSpectrum(format!("residual eigenvalue sum V_{j} vanishes")));
        }
    }
    let ratios: Vec<f64> =
        (1..=k_max).map(|j| (lambda[j - 1] / v[j - 1]).ln_1p() / (lambda[j] / v[j]).ln_1p()).collect();
    let k_hat = argmax_first(&ratios).map_or(0, |i| i + 1);
    Ok(EstimateResult { method: Method::Mktcr, k_hat, k_max, diagnostics: Diagnostics::Mktcr { ratios } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrmat::MatrixKind;

    #[test]
    fn hand_ratio() {
        let values = vec![0.5, 0.2, 0.1, 0.1, 0.1];
        let s = Spectrum::from_eigenvalues(values, MatrixKind::Mkendall, 50).unwrap();
        let r = mktcr_from_spectrum(&s, 2).unwrap();
        let Diagnostics::Mktcr { ratios } = &r.diagnostics else { unreachable!() };
        // V_0 = 1.0, V_1 = 0.5, V_2 = 0.3
        let want1 = (1.0f64 + 0.5).ln() / (1.0f64 + 0.2 / 0.5).ln();
        let want2 = (1.0f64 + 0.2 / 0.5).ln() / (1.0f64 + 0.1 / 0.3).ln();
        assert!((ratios[0] - want1).abs() < 1e-14);
        assert!((ratios[1] - want2).abs() < 1e-14);
        assert_eq!(r.k_hat, 1);
    }

    #[test]
    fn vanishing_residual_is_an_error() {
        let s = Spectrum::from_eigenvalues(vec![1.0, 0.0, 0.0, 0.0, 0.0], MatrixKind::Mkendall, 50).unwrap();
        assert!(matches!(mktcr_from_spectrum(&s, 2), Err(Error::DegenerateSpectrum(_))));
    }
}
