use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{NoiseScale, Population};
use crate::corrmat::DataMatrix;
use crate::error::{Error, Result};
use crate::theory::BulkDistribution;

/// Draws `n` observations of `y = B f + Psi e` with `f = sqrt(w^f) x` and
/// `e_j = sqrt(w^e_j) z_j`.
///
/// Draw order per observation is fixed: `w^f`, the `K` entries of `x`, then
/// `(w^e_j, z_j)` for each variable. Constant weights consume no randomness.
pub fn sample_factor_model<R: Rng + ?Sized>(
    b: &Array2<f64>,
    psi: &NoiseScale,
    population: Population,
    n: usize,
    rng: &mut R,
) -> Result<DataMatrix> {
    let (p, k) = b.dim();
    if let NoiseScale::Matrix(m) = psi {
        if m.dim() != (p, p) {
            return Err(Error::DimensionMismatch(format!(
                "noise scale is {}x{}, loadings have {p} rows",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let factor_law = population.factor_law();
    let error_law = population.error_law();

    let mut f = Array2::<f64>::zeros((n, k));
    let mut e = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        let wf = if factor_law.is_constant() { 1.0 } else { factor_law.sample(rng) };
        let sf = wf.sqrt();
        for j in 0..k {
            let x: f64 = StandardNormal.sample(rng);
            f[[i, j]] = sf * x;
        }
        for j in 0..p {
            let we = if error_law.is_constant() { 1.0 } else { error_law.sample(rng) };
            let z: f64 = StandardNormal.sample(rng);
            e[[i, j]] = we.sqrt() * z;
        }
    }

    let mut y = f.dot(&b.t());
    match psi {
        NoiseScale::Identity => y += &e,
        NoiseScale::Matrix(m) => y += &e.dot(&m.t()),
    }
    DataMatrix::new(y)
}

/// Gaussian data whose population Spearman matrix has one spike of size
/// `alpha` along the flat direction `1/sqrt(p)`.
///
/// With `y_ij = sqrt(theta/p) x_i + z_ij` every pair of variables has Pearson
/// correlation `r = (theta/p)/(1 + theta/p)` and grade correlation
/// `a = (6/pi) asin(r/2)`, so the population Spearman matrix is
/// `(1-a) I + a 11^T` with eigenvalues `1 + (p-1)a` (once) and `1 - a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpike {
    p: usize,
    alpha: f64,
    grade_corr: f64,
    theta: f64,
}

impl PlantedSpike {
    /// `alpha` must lie in `[1, p)`.
    pub fn new(p: usize, alpha: f64) -> Result<Self> {
        if p < 2 || !(1.0..p as f64).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "planted spike needs p >= 2 and 1 <= alpha < p, got p = {p}, alpha = {alpha}"
            )));
        }
        let a = (alpha - 1.0) / (p - 1) as f64;
        let r = 2.0 * (std::f64::consts::PI * a / 6.0).sin();
        let theta = p as f64 * r / (1.0 - r);
        Ok(Self { p, alpha, grade_corr: a, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Off-diagonal entry of the population Spearman matrix.
    pub fn grade_correlation(&self) -> f64 {
        self.grade_corr
    }

    /// Variance carried by the planted factor, `|B|^2`.
    pub fn factor_variance(&self) -> f64 {
        self.theta
    }

    /// The non-spiked part of the population spectrum, a point mass at `1 - a`.
    pub fn bulk(&self) -> BulkDistribution {
        BulkDistribution::point_mass(1.0 - self.grade_corr)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DataMatrix> {
        let loading = (self.theta / self.p as f64).sqrt();
        let b = Array2::from_elem((self.p, 1), loading);
        sample_factor_model(&b, &NoiseScale::Identity, Population::Normal, n, rng)
    }
}
