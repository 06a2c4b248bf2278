use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Eigenvalues below this are treated as zero when taking square roots.
const SQRT_CLAMP: f64 = 1e-12;

/// `T[i][j] = base^|i-j|`.
pub fn toeplitz(p: usize, base: f64) -> Array2<f64> {
    Array2::from_shape_fn((p, p), |(i, j)| base.powi(i.abs_diff(j) as i32))
}

/// Symmetric PSD square root of the `base^|i-j|` Toeplitz matrix.
///
/// `base` must lie in `[0, 1)`; `base = 0` gives the identity.
pub fn toeplitz_psd_sqrt(p: usize, base: f64) -> Result<Array2<f64>> {
    if !(0.0..1.0).contains(&base) {
        return Err(Error::InvalidParameter(format!("Toeplitz base must be in [0, 1), got {base}")));
    }
    psd_sqrt(&toeplitz(p, base))
}

pub(crate) fn psd_sqrt(a: &Array2<f64>) -> Result<Array2<f64>> {
    let p = a.nrows();
    let eig = symmetric_eigen(a, true)?;
    let v = eig.vectors.expect("vectors requested");
    let roots: Vec<f64> =
        eig.values.iter().map(|&l| if l < SQRT_CLAMP { 0.0 } else { l.sqrt() }).collect();
    let mut out = Array2::<f64>::zeros((p, p));
    for i in 0..p {
        for j in i..p {
            let s: f64 = (0..p).map(|k| v[[i, k]] * roots[k] * v[[j, k]]).sum();
            out[[i, j]] = s;
            out[[j, i]] = s;
        }
    }
    Ok(out)
}
