//! Spike calculus against a discrete population bulk, the scale-mixing
//! constant `gamma`, the finite-rank Spearman approximation and the
//! Marchenko-Pastur fixed-point solver.

mod gamma;
mod sigma;
mod stieltjes;

pub use gamma::{gamma_mc, GammaCheckpoint, GammaEstimate, GAMMA_MIN_SAMPLES};
pub use sigma::sigma_rho_approx;
pub use stieltjes::{mp_stieltjes, MP_DAMPING, MP_MAX_ITERATIONS, MP_TOLERANCE};

use serde::Serialize;

use crate::error::{Error, Result};

/// Discrete population spectral distribution `H = sum_k w_k delta_{t_k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BulkDistribution {
    atoms: Vec<(f64, f64)>,
}

impl BulkDistribution {
    /// Atoms are `(location, weight)`. Locations must be finite and
    /// non-negative, weights positive and summing to 1 within `1e-12`.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("bulk distribution needs at least one atom".into()));
        }
        for (i, &(t, w)) in atoms.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidParameter(format!("atom {i}: location {t} must be finite and >= 0")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidParameter(format!("atom {i}: weight {w} must be finite and > 0")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("atom weights sum to {total}, expected 1")));
        }
        Ok(Self { atoms })
    }

    pub fn point_mass(t: f64) -> Self {
        Self { atoms: vec![(t, 1.0)] }
    }

    /// Equal-weight atoms at the given eigenvalues. Round-off negatives down
    /// to `-1e-10` are clamped to zero.
    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter("bulk distribution needs at least one atom".into()));
        }
        let w = 1.0 / eigenvalues.len() as f64;
        let mut atoms = Vec::with_capacity(eigenvalues.len());
        for (i, &t) in eigenvalues.iter().enumerate() {
            if !t.is_finite() || t < -1e-10 {
                return Err(Error::InvalidParameter(format!("eigenvalue {i} = {t} is not a valid atom location")));
            }
            atoms.push((t.max(0.0), w));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Largest atom location, the right end of the support of `H`.
    pub fn max_location(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).fold(0.0, f64::max)
    }
}

/// Candidate population spikes together with the bulk and the aspect ratio
/// `c = lim p/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeModel {
    spikes: Vec<f64>,
    bulk: BulkDistribution,
    c: f64,
}

/// Outcome for one candidate spike.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeVerdict {
    pub alpha: f64,
    pub detectable: bool,
    /// `alpha` is at or left of the largest bulk atom, where `psi` is undefined.
    pub inside_bulk: bool,
    pub psi_prime: Option<f64>,
    /// Almost-sure limit of the matching sample eigenvalue: `psi(alpha)` when
    /// detectable, the bulk right edge otherwise.
    pub predicted_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceReport {
    pub k0: usize,
    pub c: f64,
    /// Root of `psi'` right of the bulk: spikes above it are detectable.
    pub threshold: f64,
    /// `psi(threshold)`, the right edge of the limiting sample spectrum.
    pub bulk_right_edge: f64,
    pub spikes: Vec<SpikeVerdict>,
}

impl SpikeModel {
    /// Spikes are stored in descending order.
    pub fn new(mut spikes: Vec<f64>, bulk: BulkDistribution, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidParameter(format!("c must be finite and > 0, got {c}")));
        }
        if let Some(a) = spikes.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter(format!("spike {a} is not finite")));
        }
        spikes.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { spikes, bulk, c })
    }

    pub fn spikes(&self) -> &[f64] {
        &self.spikes
    }

    pub fn bulk(&self) -> &BulkDistribution {
        &self.bulk
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    fn check_right_of_bulk(&self, alpha: f64) -> Result<()> {
        let bulk_max = self.bulk.max_location();
        if !alpha.is_finite() || alpha <= bulk_max {
            return Err(Error::InsideBulk { alpha, bulk_max });
        }
        Ok(())
    }

    /// `alpha + c * sum_k w_k t_k alpha / (alpha - t_k)`.
    pub fn psi(&self, alpha: f64) -> Result<f64> {
        self.check_right_of_bulk(alpha)?;
        Ok(self.psi_unchecked(alpha))
    }

    /// `1 - c * sum_k w_k t_k^2 / (alpha - t_k)^2`.
    pub fn psi_prime(&self, alpha: f64) -> Result<f64> {
        self.check_right_of_bulk(alpha)?;
        Ok(self.psi_prime_unchecked(alpha))
    }

    fn psi_unchecked(&self, alpha: f64) -> f64 {
        let s: f64 = self.bulk.atoms.iter().map(|&(t, w)| w * t * alpha / (alpha - t)).sum();
        alpha + self.c * s
    }

    fn psi_prime_unchecked(&self, alpha: f64) -> f64 {
        let s: f64 = self.bulk.atoms.iter().map(|&(t, w)| w * t * t / ((alpha - t) * (alpha - t))).sum();
        1.0 - self.c * s
    }

    /// The unique zero of `psi'` on `(max t_k, inf)`, found by bisection
    /// (`psi'` is strictly increasing there). Equals `max t_k` when every atom
    /// sits at zero.
    pub fn threshold(&self) -> f64 {
        let t_max = self.bulk.max_location();
        if t_max == 0.0 {
            return 0.0;
        }
        // psi'(t_max + t_max sqrt(c)) >= 0 because every term is bounded by the top atom
        let mut lo = t_max;
        let mut hi = t_max * (1.0 + self.c.sqrt()) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        while self.psi_prime_unchecked(hi) < 0.0 {
            hi = t_max + 2.0 * (hi - t_max);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.psi_prime_unchecked(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `psi(threshold)`.
    pub fn bulk_right_edge(&self) -> f64 {
        let a = self.threshold();
        if a == 0.0 {
            0.0
        } else {
            self.psi_unchecked(a)
        }
    }

    /// `K_0 = #{j : psi'(alpha_j) > 0}` with per-spike verdicts.
    pub fn count_significant(&self) -> SignificanceReport {
        let threshold = self.threshold();
        let edge = self.bulk_right_edge();
        let spikes: Vec<SpikeVerdict> = self
            .spikes
            .iter()
            .map(|&alpha| match self.psi_prime(alpha) {
                Ok(d) => {
                    let detectable = d > 0.0;
                    SpikeVerdict {
                        alpha,
                        detectable,
                        inside_bulk: false,
                        psi_prime: Some(d),
                        predicted_limit: if detectable { self.psi_unchecked(alpha) } else { edge },
                    }
                }
                Err(_) => SpikeVerdict {
                    alpha,
                    detectable: false,
                    inside_bulk: true,
                    psi_prime: None,
                    predicted_limit: edge,
                },
            })
            .collect();
        SignificanceReport {
            k0: spikes.iter().filter(|v| v.detectable).count(),
            c: self.c,
            threshold,
            bulk_right_edge: edge,
            spikes,
        }
    }
}
