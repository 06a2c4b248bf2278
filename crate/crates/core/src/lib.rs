//! Robust estimation of the number of factors in high-dimensional factor
//! models from the spectrum of the Spearman sample correlation matrix.
//!
//! The crate is organised around the pipeline the estimators share:
//!
//! - [`corrmat`]: rank transform, Spearman / Pearson / covariance /
//!   multivariate Kendall's tau matrices, Toeplitz square roots.
//! - [`spectra`]: descending symmetric eigenvalues and the Stieltjes
//!   derivative statistics used by the Stieltjes-ratio (SR) estimator.
//! - [`theory`]: spiked-model phase-transition quantities (`psi`, `psi'`,
//!   significant-factor count), the Spearman attenuation constant `gamma`,
//!   and a generalized Marchenko-Pastur Stieltjes solver.
//! - [`estimators`]: SR together with the NE, ED, MKTCR and ACT competitors.
//! - [`simulate`]: scale-mixture-of-normals factor model generator and a
//!   reproducible Monte Carlo harness.

pub mod corrmat;
pub mod error;
pub mod estimators;
mod linalg;
pub mod simulate;
pub mod spectra;
pub mod theory;

pub use corrmat::{
    covariance, mkendall, pearson, rank_transform, spearman, toeplitz, toeplitz_psd_sqrt,
    CorrMatrix, DataMatrix, MatrixKind, RankMatrix, TiePolicy,
};
pub use error::{Error, Result};
pub use estimators::{
    estimate_act, estimate_ed, estimate_mktcr, estimate_ne, estimate_sr, Diagnostics,
    EstimateResult, Method, DEFAULT_K_MAX,
};
pub use simulate::{
    make_loadings, run_scenario, sample_factor_model, FrequencyTable, LoadingCase, LoadingSpec,
    MethodSummary, NoiseScale, PlantedSpike, Population, ScenarioSpec,
};
pub use spectra::{eigen_sym, m_hat_prime, m_tilde_prime, Spectrum};
pub use theory::{
    gamma_mc, mp_stieltjes, sigma_rho_approx, BulkDistribution, GammaEstimate,
    SignificanceReport, SpikeModel, SpikeVerdict,
};
