use num_complex::Complex64;

use super::BulkDistribution;
use crate::error::{Error, Result};

pub const MP_DAMPING: f64 = 0.5;
pub const MP_TOLERANCE: f64 = 1e-12;
pub const MP_MAX_ITERATIONS: usize = 100_000;

/// Stieltjes transform `m(z)` of the limiting sample spectrum for population
/// bulk `H` and ratio `c`: the solution of
/// `m = sum_k w_k / (t_k (1 - c - c z m) - z)`.
///
/// Damped fixed-point iteration from `m = -1/z`, stopping when successive
/// iterates differ by less than `1e-12`. `z` must have `Im z >= 0`; real `z`
/// must lie outside the support, otherwise the iteration fails to settle.
pub fn mp_stieltjes(bulk: &BulkDistribution, c: f64, z: Complex64) -> Result<Complex64> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParameter(format!("c must be finite and >= 0, got {c}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() || z.im < 0.0 || z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter(format!("z must be finite, nonzero, with Im z >= 0, got {z}")));
    }
    let rhs = |m: Complex64| -> Complex64 {
        let shrink = 1.0 - c - c * z * m;
        bulk.atoms().iter().map(|&(t, w)| w / (t * shrink - z)).sum()
    };
    let mut m = -1.0 / z;
    let mut step = f64::INFINITY;
    for _ in 0..MP_MAX_ITERATIONS {
        let next = (1.0 - MP_DAMPING) * m + MP_DAMPING * rhs(m);
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        step = (next - m).norm();
        m = next;
        if step < MP_TOLERANCE {
            return Ok(m);
        }
    }
    Err(Error::FixedPointNoConvergence { iterations: MP_MAX_ITERATIONS, residual: step / MP_DAMPING })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_at_minus_one() {
        let m = mp_stieltjes(&BulkDistribution::point_mass(1.0), 0.5, Complex64::new(-1.0, 0.0)).unwrap();
        let want = (-3.0 + 17f64.sqrt()) / 2.0;
        assert!((m.re - want).abs() < 1e-11);
        assert!((m.re - 0.561_553).abs() < 1e-6);
        assert_eq!(m.im, 0.0);
    }

    #[test]
    fn zero_ratio_is_plain_transform() {
        let bulk = BulkDistribution::new(vec![(0.5, 0.25), (2.0, 0.75)]).unwrap();
        let z = Complex64::new(1.0, 0.3);
        let m = mp_stieltjes(&bulk, 0.0, z).unwrap();
        let want: Complex64 = bulk.atoms().iter().map(|&(t, w)| w / (t - z)).sum();
        assert!((m - want).norm() < 1e-10);
    }

    #[test]
    fn rejects_lower_half_plane() {
        let bulk = BulkDistribution::point_mass(1.0);
        assert!(mp_stieltjes(&bulk, 0.5, Complex64::new(1.0, -0.1)).is_err());
        assert!(mp_stieltjes(&bulk, 0.5, Complex64::new(0.0, 0.0)).is_err());
        assert!(mp_stieltjes(&bulk, -0.5, Complex64::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn upper_half_plane_output() {
        let bulk = BulkDistribution::new(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        let z = Complex64::new(2.0, 0.5);
        let m = mp_stieltjes(&bulk, 0.3, z).unwrap();
        assert!(m.im > 0.0);
        let shrink = 1.0 - 0.3 - 0.3 * z * m;
        let rhs: Complex64 = bulk.atoms().iter().map(|&(t, w)| w / (t * shrink - z)).sum();
        assert!((m - rhs).norm() < 1e-10);
    }
}
