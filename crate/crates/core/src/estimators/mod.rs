//! Factor-count estimators behind one interface.
//!
//! | method  | matrix                      | rule                                   |
//! |---------|-----------------------------|----------------------------------------|
//! | `sr`    | Spearman                    | argmax of Stieltjes-derivative ratios  |
//! | `ne`    | sample covariance           | argmin of a moment-matching objective  |
//! | `ed`    | sample covariance           | largest gap above a calibrated delta   |
//! | `mktcr` | multivariate Kendall's tau  | argmax of log-ratio of residual shares |
//! | `act`   | Pearson                     | bias-corrected eigenvalue threshold    |
//!
//! Every argmax / argmin breaks ties toward the smallest index. Each method
//! also has a `*_from_spectrum` form for callers that already hold the
//! eigenvalues.

mod act;
mod ed;
mod mktcr;
mod ne;
mod sr;

pub use act::{act_from_spectrum, estimate_act};
pub use ed::{ed_from_spectrum, estimate_ed, ED_MAX_ITERATIONS};
pub use mktcr::{estimate_mktcr, mktcr_from_spectrum};
pub use ne::{estimate_ne, ne_from_spectrum};
pub use sr::{estimate_sr, estimate_sr_with, sr_from_spectrum};

use serde::{Deserialize, Serialize};

use crate::corrmat::{DataMatrix, TiePolicy};
use crate::error::Result;

/// Default cap on the number of factors scanned.
pub const DEFAULT_K_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sr,
    Ne,
    Ed,
    Mktcr,
    Act,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Sr, Method::Ne, Method::Ed, Method::Mktcr, Method::Act];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sr => "sr",
            Method::Ne => "ne",
            Method::Ed => "ed",
            Method::Mktcr => "mktcr",
            Method::Act => "act",
        }
    }

    /// Runs the estimator. NE ignores `k_max` and scans `0..min(p, n)`.
    pub fn estimate(self, data: &DataMatrix, k_max: usize) -> Result<EstimateResult> {
        self.estimate_with(data, k_max, TiePolicy::Midrank)
    }

    /// As [`Method::estimate`]; `tie_policy` only affects SR.
    pub fn estimate_with(self, data: &DataMatrix, k_max: usize, tie_policy: TiePolicy) -> Result<EstimateResult> {
        match self {
            Method::Sr => estimate_sr_with(data, k_max, tie_policy),
            Method::Ne => estimate_ne(data),
            Method::Ed => estimate_ed(data, k_max),
            Method::Mktcr => estimate_mktcr(data, k_max),
            Method::Act => estimate_act(data, k_max),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == lower)
            .ok_or_else(|| format!("unknown method '{s}' (expected sr, ne, ed, mktcr or act)"))
    }
}

/// Per-index trace of an estimator. Index `i` of every vector refers to
/// `j = i + 1`, except for NE where it refers to `j = i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Diagnostics {
    Sr {
        /// `m~'_{j+1} / m~'_j` for `j = 1..=k_max`.
        ratios: Vec<f64>,
        /// `m~'_j` for `j = 1..=k_max+1`.
        m_tilde: Vec<f64>,
    },
    Ne {
        t: Vec<f64>,
        objective: Vec<f64>,
    },
    Ed {
        delta: f64,
        /// `lambda_j - lambda_{j+1}` for `j = 1..=k_max`.
        gaps: Vec<f64>,
        iterations: usize,
        converged: bool,
    },
    Mktcr {
        ratios: Vec<f64>,
    },
    Act {
        /// Corrected eigenvalues, `None` where the correction is undefined.
        alpha_hat: Vec<Option<f64>>,
        threshold: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub method: Method,
    pub k_hat: usize,
    /// Largest index scanned; for NE this is `min(p, n) - 1`.
    pub k_max: usize,
    pub diagnostics: Diagnostics,
}

/// First index of the maximum; NaN entries never win.
fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
