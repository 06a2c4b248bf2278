//! Factor-model data generation and the Monte Carlo harness.
//!
//! Replication `r` of a scenario draws everything from its own ChaCha8
//! stream seeded with [`substream_seed`]`(seed, r)`, and replications are
//! aggregated in index order, so a [`FrequencyTable`] depends only on the
//! [`ScenarioSpec`], never on the number of worker threads.

mod loadings;
mod model;
mod population;

pub use loadings::{make_loadings, LoadingCase, LoadingSpec, NoiseScale, C3_TOEPLITZ_BASE};
pub use model::{sample_factor_model, PlantedSpike};
pub use population::{InverseGamma, Population, WeightLaw};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep`: `mix64(seed + mix64(rep + 1) * phi)` with
/// `phi` the 64-bit golden-ratio constant.
pub fn substream_seed(seed: u64, rep: u64) -> u64 {
    const PHI: u64 = 0x9e37_79b9_7f4a_7c15;
    mix64(seed.wrapping_add(mix64(rep.wrapping_add(1)).wrapping_mul(PHI)))
}

/// Generator for replication `rep` of a scenario with base seed `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, rep))
}

/// One simulation scenario. Serializes with the keys
/// `population, case, p, n, K, kmax, reps, seed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub population: Population,
    pub case: LoadingCase,
    pub p: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "kmax")]
    pub k_max: usize,
    pub reps: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.p < self.k + 1 {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= K and p >= K + 1, got K = {}, p = {}",
                self.k, self.p
            )));
        }
        if self.n < 4 {
            return Err(Error::InvalidParameter(format!("need n >= 4, got {}", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("need reps >= 1".into()));
        }
        Ok(())
    }

    pub fn loading_spec(&self) -> Result<LoadingSpec> {
        LoadingSpec::new(self.case, self.p, self.k)
    }
}

/// Accuracy summary of one estimator over all replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub correct_pct: f64,
    pub over_pct: f64,
    pub under_pct: f64,
    pub failed_pct: f64,
    /// Mean estimate over successful replications (`NaN` if none succeeded).
    pub mean_k_hat: f64,
    /// Estimate per replication, `None` where the estimator failed.
    pub k_hats: Vec<Option<usize>>,
    /// `(replication, message)` for each failure.
    pub failures: Vec<(usize, String)>,
}

impl MethodSummary {
    fn from_outcomes(method: Method, true_k: usize, outcomes: Vec<std::result::Result<usize, String>>) -> Self {
        let reps = outcomes.len() as f64;
        let (mut correct, mut over, mut under) = (0usize, 0usize, 0usize);
        let mut k_hats = Vec::with_capacity(outcomes.len());
        let mut failures = Vec::new();
        let mut sum = 0usize;
        for (rep, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(k) => {
                    match k.cmp(&true_k) {
                        std::cmp::Ordering::Equal => correct += 1,
                        std::cmp::Ordering::Greater => over += 1,
                        std::cmp::Ordering::Less => under += 1,
                    }
                    sum += k;
                    k_hats.push(Some(k));
                }
                Err(msg) => {
                    failures.push((rep, msg));
                    k_hats.push(None);
                }
            }
        }
        let ok = correct + over + under;
        let pct = |c: usize| 100.0 * c as f64 / reps;
        Self {
            method,
            correct_pct: pct(correct),
            over_pct: pct(over),
            under_pct: pct(under),
            failed_pct: pct(failures.len()),
            mean_k_hat: if ok > 0 { sum as f64 / ok as f64 } else { f64::NAN },
            k_hats,
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub scenario: ScenarioSpec,
    pub rows: Vec<MethodSummary>,
}

impl FrequencyTable {
    pub fn row(&self, method: Method) -> Option<&MethodSummary> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Runs every replication of `spec` and tabulates each estimator in
/// `methods` against the true `K`. Estimator errors are recorded per
/// replication instead of aborting.
pub fn run_scenario(spec: &ScenarioSpec, methods: &[Method]) -> Result<FrequencyTable> {
    spec.validate()?;
    let loading = spec.loading_spec()?;
    let psi = loading.noise_scale()?;

    let per_rep: Vec<Vec<std::result::Result<usize, String>>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(spec.seed, rep as u64);
            let b = loading.sample_loadings(&mut rng);
            match sample_factor_model(&b, &psi, spec.population, spec.n, &mut rng) {
                Ok(data) => methods
                    .iter()
                    .map(|m| m.estimate(&data, spec.k_max).map(|r| r.k_hat).map_err(|e| e.to_string()))
                    .collect(),
                Err(e) => vec![Err(e.to_string()); methods.len()],
            }
        })
        .collect();

    let rows = methods
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            let outcomes = per_rep.iter().map(|rep| rep[mi].clone()).collect();
            MethodSummary::from_outcomes(m, spec.k, outcomes)
        })
        .collect();
    Ok(FrequencyTable { scenario: spec.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(reps: usize) -> ScenarioSpec {
        ScenarioSpec {
            population: Population::Normal,
            case: LoadingCase::C1,
            p: 40,
            n: 80,
            k: 3,
            k_max: 8,
            reps,
            seed: 42,
        }
    }

    #[test]
    fn substreams_differ_and_are_stable() {
        assert_ne!(substream_seed(1, 0), substream_seed(1, 1));
        assert_ne!(substream_seed(1, 0), substream_seed(2, 0));
        assert_eq!(substream_seed(7, 3), substream_seed(7, 3));
    }

    #[test]
    fn single_replication_is_one_hot() {
        let t = run_scenario(&small_spec(1), &[Method::Sr, Method::Ne]).unwrap();
        for row in &t.rows {
            let cells = [row.correct_pct, row.over_pct, row.under_pct, row.failed_pct];
            assert_eq!(cells.iter().filter(|&&c| c == 100.0).count(), 1);
            assert_eq!(cells.iter().filter(|&&c| c == 0.0).count(), 3);
        }
    }

    #[test]
    fn percentages_add_up_and_mean_matches_log() {
        let t = run_scenario(&small_spec(12), &Method::ALL).unwrap();
        for row in &t.rows {
            let total = row.correct_pct + row.over_pct + row.under_pct + row.failed_pct;
            assert!((total - 100.0).abs() < 1e-9);
            let ks: Vec<usize> = row.k_hats.iter().flatten().copied().collect();
            if !ks.is_empty() {
                let mean = ks.iter().sum::<usize>() as f64 / ks.len() as f64;
                assert_eq!(mean, row.mean_k_hat);
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = small_spec(8);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_scenario(&spec, &[Method::Sr, Method::Mktcr]).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn estimator_failures_are_counted() {
        // ED needs k_max + 5 < min(p, n)
        let mut spec = small_spec(3);
        spec.k_max = 36;
        let t = run_scenario(&spec, &[Method::Ed]).unwrap();
        let row = t.row(Method::Ed).unwrap();
        assert_eq!(row.failed_pct, 100.0);
        assert_eq!(row.failures.len(), 3);
        assert!(row.mean_k_hat.is_nan());
    }
}
