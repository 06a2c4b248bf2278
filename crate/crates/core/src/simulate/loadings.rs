use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corrmat::toeplitz_psd_sqrt;
use crate::error::{Error, Result};

/// Base of the Toeplitz noise correlation in case C3.
pub const C3_TOEPLITZ_BASE: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoadingCase {
    /// Deterministic loadings `sqrt(5j/p)` on the first `K` rows and
    /// `±sqrt(5j/(p-j))` below, negative when the row is a multiple of `j`.
    C1,
    /// Gaussian loadings with column `j` scaled by `sqrt(10j/p)`.
    C2,
    /// C2 loadings with Toeplitz-correlated noise `Psi = T^{1/2}`.
    C3,
}

impl std::str::FromStr for LoadingCase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(LoadingCase::C1),
            "C2" => Ok(LoadingCase::C2),
            "C3" => Ok(LoadingCase::C3),
            _ => Err(format!("unknown loading case '{s}' (expected C1, C2 or C3)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadingSpec {
    pub case: LoadingCase,
    pub p: usize,
    pub k: usize,
}

/// Noise scale matrix `Psi` in `y = B f + Psi e`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseScale {
    Identity,
    /// Dense (and in C3 non-diagonal) scale matrix.
    Matrix(Array2<f64>),
}

impl NoiseScale {
    pub fn to_matrix(&self, p: usize) -> Array2<f64> {
        match self {
            NoiseScale::Identity => Array2::eye(p),
            NoiseScale::Matrix(m) => m.clone(),
        }
    }
}

impl LoadingSpec {
    pub fn new(case: LoadingCase, p: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= p {
            return Err(Error::InvalidParameter(format!("need 1 <= K < p, got K = {k}, p = {p}")));
        }
        Ok(Self { case, p, k })
    }

    /// The scale matrix does not depend on the random stream, so it can be
    /// built once per scenario.
    pub fn noise_scale(&self) -> Result<NoiseScale> {
        match self.case {
            LoadingCase::C1 | LoadingCase::C2 => Ok(NoiseScale::Identity),
            LoadingCase::C3 => Ok(NoiseScale::Matrix(toeplitz_psd_sqrt(self.p, C3_TOEPLITZ_BASE)?)),
        }
    }

    /// Draws the `p x K` loading matrix (deterministic for C1).
    pub fn sample_loadings<R: Rng + ?Sized>(&self, rng: &mut R) -> Array2<f64> {
        let (p, k) = (self.p, self.k);
        match self.case {
            LoadingCase::C1 => Array2::from_shape_fn((p, k), |(i0, j0)| {
                let (i, j) = (i0 + 1, j0 + 1);
                if i <= k {
                    (5.0 * j as f64 / p as f64).sqrt()
                } else {
                    let sign = if i % j == 0 { -1.0 } else { 1.0 };
                    sign * (5.0 * j as f64 / (p - j) as f64).sqrt()
                }
            }),
            LoadingCase::C2 | LoadingCase::C3 => {
                let mut b = Array2::<f64>::zeros((p, k));
                for i in 0..p {
                    for j in 0..k {
                        let z: f64 = StandardNormal.sample(rng);
                        b[[i, j]] = (10.0 * (j + 1) as f64 / p as f64).sqrt() * z;
                    }
                }
                b
            }
        }
    }
}

/// Loading matrix and noise scale for one replication.
pub fn make_loadings<R: Rng + ?Sized>(spec: &LoadingSpec, rng: &mut R) -> Result<(Array2<f64>, NoiseScale)> {
    let psi = spec.noise_scale()?;
    Ok((spec.sample_loadings(rng), psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrmat::toeplitz;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn c1_hand_values() {
        let spec = LoadingSpec::new(LoadingCase::C1, 10, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (b, psi) = make_loadings(&spec, &mut rng).unwrap();
        assert_eq!(psi, NoiseScale::Identity);
        assert!((b[[0, 0]] - 0.5f64.sqrt()).abs() < 1e-15);
        // row 6, column 2: 6 = 3 * 2, so the sign is negative
        assert!((b[[5, 1]] + (10.0f64 / 8.0).sqrt()).abs() < 1e-15);
        // row 7, column 2: not a multiple
        assert!((b[[6, 1]] - (10.0f64 / 8.0).sqrt()).abs() < 1e-15);
        // column 1: every row is a multiple of 1
        assert!(b.column(0).iter().skip(3).all(|&v| v < 0.0));
    }

    #[test]
    fn c1_column_norms() {
        let (p, k) = (200, 3);
        let spec = LoadingSpec::new(LoadingCase::C1, p, k).unwrap();
        let b = spec.sample_loadings(&mut ChaCha8Rng::seed_from_u64(0));
        for j in 1..=k {
            let norm2: f64 = b.column(j - 1).iter().map(|x| x * x).sum();
            let want = k as f64 * 5.0 * j as f64 / p as f64 + (p - k) as f64 * 5.0 * j as f64 / (p - j) as f64;
            assert!((norm2 - want).abs() < 1e-10);
            assert!((norm2 - 5.0 * j as f64).abs() < 0.2 * j as f64);
        }
    }

    #[test]
    fn c3_noise_squares_to_toeplitz() {
        let spec = LoadingSpec::new(LoadingCase::C3, 40, 3).unwrap();
        let NoiseScale::Matrix(psi) = spec.noise_scale().unwrap() else {
            panic!("C3 must have a dense noise scale");
        };
        let diff = &psi.dot(&psi) - &toeplitz(40, C3_TOEPLITZ_BASE);
        assert!(diff.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-10);
    }

    #[test]
    fn c2_scaling_and_reproducibility() {
        let spec = LoadingSpec::new(LoadingCase::C2, 400, 3).unwrap();
        let b1 = spec.sample_loadings(&mut ChaCha8Rng::seed_from_u64(5));
        let b2 = spec.sample_loadings(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(b1, b2);
        // E |B_j|^2 = 10 j
        for j in 1..=3 {
            let norm2: f64 = b1.column(j - 1).iter().map(|x| x * x).sum();
            assert!((norm2 / (10.0 * j as f64) - 1.0).abs() < 0.25);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(LoadingSpec::new(LoadingCase::C1, 3, 3).is_err());
        assert!(LoadingSpec::new(LoadingCase::C1, 3, 0).is_err());
    }
}
