use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::lu_solve;

/// Finite-rank approximation of the population Spearman matrix:
/// off-diagonal entries of `gamma * Psi^{-1} B B^T Psi^{-T}` and an exact unit
/// diagonal. `Psi` must be square, invertible and match the rows of `B`.
pub fn sigma_rho_approx(b: &Array2<f64>, psi: &Array2<f64>, gamma: f64) -> Result<Array2<f64>> {
    let p = b.nrows();
    if psi.dim() != (p, p) {
        return Err(Error::DimensionMismatch(format!(
            "noise scale is {}x{}, loadings have {p} rows",
            psi.nrows(),
            psi.ncols()
        )));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be finite, got {gamma}")));
    }
    let m = lu_solve(psi, b)?;
    let mut out = Array2::<f64>::eye(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let v = gamma * m.row(i).dot(&m.row(j));
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigen;

    #[test]
    fn zero_loadings_give_identity() {
        let s = sigma_rho_approx(&Array2::zeros((5, 2)), &Array2::eye(5), 0.9).unwrap();
        assert_eq!(s, Array2::eye(5));
    }

    #[test]
    fn orthonormal_loadings_lift_top_eigenvalues() {
        let p = 60;
        let k = 2;
        let mut b = Array2::<f64>::zeros((p, k));
        // two orthonormal columns: flat and alternating
        for i in 0..p {
            b[[i, 0]] = 1.0 / (p as f64).sqrt();
            b[[i, 1]] = if i % 2 == 0 { 1.0 } else { -1.0 } / (p as f64).sqrt();
        }
        let gamma = 3.0 / std::f64::consts::PI;
        let s = sigma_rho_approx(&b, &Array2::eye(p), gamma).unwrap();
        assert_eq!(s.diag().sum(), p as f64);
        assert_eq!(s, s.t());
        let eig = symmetric_eigen(&s, false).unwrap();
        for j in 0..k {
            assert!((eig.values[j] - (1.0 + gamma)).abs() < 2.0 * k as f64 / p as f64);
        }
    }

    #[test]
    fn singular_noise_scale_is_an_error() {
        let mut psi = Array2::<f64>::eye(4);
        psi[[2, 2]] = 0.0;
        assert!(matches!(sigma_rho_approx(&Array2::ones((4, 1)), &psi, 1.0), Err(Error::Singular)));
        assert!(sigma_rho_approx(&Array2::ones((4, 1)), &Array2::eye(3), 1.0).is_err());
    }
}
