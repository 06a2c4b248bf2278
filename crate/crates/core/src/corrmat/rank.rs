use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DataMatrix;
use crate::error::{Error, Result};

/// How tied values within a column are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Tied values share the average of the ranks they span.
    #[default]
    Midrank,
    /// Ties are broken by a seeded random permutation of the rows, so every
    /// column of ranks is an exact permutation of `1..=n`.
    Jitter { seed: u64 },
}

/// Column-wise ranks of a data matrix together with the centred and scaled
/// version `sqrt(12 / (n^2 - 1)) * (r - (n + 1) / 2)`.
#[derive(Debug, Clone)]
pub struct RankMatrix {
    ranks: Array2<f64>,
    normalized: Array2<f64>,
    tie_policy: TiePolicy,
    has_ties: Vec<bool>,
}

impl RankMatrix {
    /// Raw ranks in `1..=n` (midranks may be half-integers).
    pub fn ranks(&self) -> &Array2<f64> {
        &self.ranks
    }

    pub fn normalized(&self) -> &Array2<f64> {
        &self.normalized
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    /// Whether column `col` contained tied values (always false under jitter).
    pub fn column_has_ties(&self, col: usize) -> bool {
        self.has_ties[col]
    }

    pub fn n_obs(&self) -> usize {
        self.ranks.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.ranks.ncols()
    }
}

pub fn rank_transform(data: &DataMatrix, tie_policy: TiePolicy) -> Result<RankMatrix> {
    let (n, p) = data.values().dim();
    if n < 2 {
        return Err(Error::TooFewObservations { got: n, min: 2 });
    }

    // row priority used to break ties under jitter
    let tie_break: Option<Vec<usize>> = match tie_policy {
        TiePolicy::Midrank => None,
        TiePolicy::Jitter { seed } => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            Some(perm)
        }
    };

    let mut ranks = Array2::<f64>::zeros((n, p));
    let mut has_ties = vec![false; p];
    let mut order: Vec<usize> = (0..n).collect();
    for (col, column) in data.values().columns().into_iter().enumerate() {
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
        match &tie_break {
            None => order.sort_by(|&a, &b| column[a].total_cmp(&column[b])),
            Some(prio) => order.sort_by(|&a, &b| {
                column[a].total_cmp(&column[b]).then(prio[a].cmp(&prio[b]))
            }),
        }

        if tie_break.is_some() {
            for (pos, &row) in order.iter().enumerate() {
                ranks[[row, col]] = (pos + 1) as f64;
            }
            continue;
        }

        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && column[order[end]] == column[order[start]] {
                end += 1;
            }
            if end - start > 1 {
                has_ties[col] = true;
            }
            // positions start..end hold ranks start+1..=end
            let mid = (start + 1 + end) as f64 / 2.0;
            for &row in &order[start..end] {
                ranks[[row, col]] = mid;
            }
            start = end;
        }
    }

    let nf = n as f64;
    let centre = (nf + 1.0) / 2.0;
    let scale = (12.0 / (nf * nf - 1.0)).sqrt();
    let normalized = ranks.mapv(|r| scale * (r - centre));

    Ok(RankMatrix { ranks, normalized, tie_policy, has_ties })
}
