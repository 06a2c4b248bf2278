//! Correlation-type matrices built from an `n x p` data matrix (rows are
//! observations, columns are variables).
//!
//! Every reduction runs in a fixed order, so identical inputs give
//! bit-identical outputs whatever the thread count. The multivariate
//! Kendall's tau matrix splits its pair sum into fixed-size chunks that are
//! reduced in chunk order.

mod rank;
mod structured;

pub use rank::{rank_transform, RankMatrix, TiePolicy};
pub use structured::{toeplitz, toeplitz_psd_sqrt};

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated observation matrix: at least two rows, one column, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, p) = values.dim();
        if n < 2 {
            return Err(Error::TooFewObservations { got: n, min: 2 });
        }
        if p == 0 {
            return Err(Error::NoColumns);
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    /// Number of observations `n`.
    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    /// Number of variables `p`.
    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    /// Applies `f` entrywise. Fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.mapv(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Spearman,
    Pearson,
    Covariance,
    Mkendall,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Spearman => "spearman",
            MatrixKind::Pearson => "pearson",
            MatrixKind::Covariance => "covariance",
            MatrixKind::Mkendall => "mkendall",
        }
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "spearman" => Ok(MatrixKind::Spearman),
            "pearson" => Ok(MatrixKind::Pearson),
            "covariance" => Ok(MatrixKind::Covariance),
            "mkendall" => Ok(MatrixKind::Mkendall),
            other => Err(format!("unknown matrix kind '{other}'")),
        }
    }
}

/// Symmetric `p x p` matrix tagged with how it was built and from how many
/// observations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    values: Array2<f64>,
    kind: MatrixKind,
    n_obs: usize,
}

impl CorrMatrix {
    /// Wraps an externally built matrix, which must be square, finite and
    /// exactly symmetric.
    pub fn new(values: Array2<f64>, kind: MatrixKind, n_obs: usize) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c || r == 0 {
            return Err(Error::DimensionMismatch(format!("expected a non-empty square matrix, got {r}x{c}")));
        }
        for i in 0..r {
            for j in 0..c {
                if !values[[i, j]].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if values[[i, j]] != values[[j, i]] {
                    return Err(Error::InvalidParameter(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { values, kind, n_obs })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.values.diag().sum()
    }
}

/// `(1/scale) * x^T x`, mirrored from the upper triangle so the result is
/// exactly symmetric.
fn gram(x: &Array2<f64>, scale: f64) -> Array2<f64> {
    let mut g = x.t().dot(x);
    let p = g.nrows();
    for i in 0..p {
        g[[i, i]] /= scale;
        for j in i + 1..p {
            let v = g[[i, j]] / scale;
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    g
}

fn centered(data: &DataMatrix) -> Array2<f64> {
    let x = data.values();
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    x - &mean.insert_axis(Axis(0))
}

fn is_constant(column: ndarray::ArrayView1<f64>) -> bool {
    let first = column[0];
    column.iter().all(|&v| v == first)
}

/// Spearman sample correlation matrix `(1/n) R^T R` of the normalized ranks.
///
/// Without ties every normalized rank column has squared norm exactly `n`.
/// With midrank ties the column norm shrinks; such columns are rescaled to
/// norm `sqrt(n)` so the result stays the Pearson correlation of the ranks.
pub fn spearman(data: &DataMatrix, tie_policy: TiePolicy) -> Result<CorrMatrix> {
    let ranks = rank_transform(data, tie_policy)?;
    let n = data.n_obs();
    let mut r = ranks.normalized().clone();
    for col in 0..r.ncols() {
        if !ranks.column_has_ties(col) {
            continue;
        }
        let mut column = r.column_mut(col);
        let sq: f64 = column.iter().map(|x| x * x).sum();
        if sq == 0.0 {
            return Err(Error::ZeroVariance { col });
        }
        let factor = (n as f64 / sq).sqrt();
        column.mapv_inplace(|x| x * factor);
    }
    Ok(CorrMatrix { values: gram(&r, n as f64), kind: MatrixKind::Spearman, n_obs: n })
}

/// Sample covariance with divisor `n`.
pub fn covariance(data: &DataMatrix) -> Result<CorrMatrix> {
    let n = data.n_obs();
    let xc = centered(data);
    Ok(CorrMatrix { values: gram(&xc, n as f64), kind: MatrixKind::Covariance, n_obs: n })
}

/// Pearson correlation `D^{-1/2} S D^{-1/2}` with `D = diag(S)`.
pub fn pearson(data: &DataMatrix) -> Result<CorrMatrix> {
    if let Some(col) = (0..data.n_vars()).find(|&c| is_constant(data.values().column(c))) {
        return Err(Error::ZeroVariance { col });
    }
    let s = covariance(data)?;
    let sd: Vec<f64> = s.values.diag().iter().map(|v| v.sqrt()).collect();
    if let Some(col) = sd.iter().position(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::ZeroVariance { col });
    }
    let p = sd.len();
    let mut values = s.values;
    for i in 0..p {
        for j in i..p {
            let v = if i == j { 1.0 } else { values[[i, j]] / (sd[i] * sd[j]) };
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    Ok(CorrMatrix { values, kind: MatrixKind::Pearson, n_obs: data.n_obs() })
}

const PAIR_CHUNK: usize = 2048;

/// Sample multivariate Kendall's tau matrix
/// `2/(n(n-1)) * sum_{i<l} d d^T / |d|^2` with `d = y_i - y_l`.
///
/// Cost is `O(n^2 p^2)`: the `n(n-1)/2` normalized differences are stacked in
/// chunks and each chunk contributes one Gram product.
pub fn mkendall(data: &DataMatrix) -> Result<CorrMatrix> {
    let x = data.values();
    let (n, p) = x.dim();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |l| (i, l))).collect();

    let partials: Vec<Result<Array2<f64>>> = pairs
        .par_chunks(PAIR_CHUNK)
        .map(|chunk| {
            let mut d = Array2::<f64>::zeros((chunk.len(), p));
            for (row, &(i, l)) in chunk.iter().enumerate() {
                let mut diff = d.row_mut(row);
                let mut sq = 0.0;
                for c in 0..p {
                    let v = x[[i, c]] - x[[l, c]];
                    diff[c] = v;
                    sq += v * v;
                }
                if sq == 0.0 {
                    return Err(Error::DuplicateRows { first: i, second: l });
                }
                let inv = sq.sqrt().recip();
                diff.mapv_inplace(|v| v * inv);
            }
            Ok(d.t().dot(&d))
        })
        .collect();

    let mut total = Array2::<f64>::zeros((p, p));
    for part in partials {
        total += &part?;
    }
    let npairs = (n * (n - 1) / 2) as f64;
    let mut values = total;
    for i in 0..p {
        values[[i, i]] /= npairs;
        for j in i + 1..p {
            let v = values[[i, j]] / npairs;
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    Ok(CorrMatrix { values, kind: MatrixKind::Mkendall, n_obs: n })
}

/// Builds a correlation-type matrix of the requested kind.
pub fn build(data: &DataMatrix, kind: MatrixKind, tie_policy: TiePolicy) -> Result<CorrMatrix> {
    match kind {
        MatrixKind::Spearman => spearman(data, tie_policy),
        MatrixKind::Pearson => pearson(data),
        MatrixKind::Covariance => covariance(data),
        MatrixKind::Mkendall => mkendall(data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dm(a: Array2<f64>) -> DataMatrix {
        DataMatrix::new(a).unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(DataMatrix::new(array![[1.0, 2.0]]), Err(Error::TooFewObservations { .. })));
        assert!(matches!(DataMatrix::new(Array2::zeros((3, 0))), Err(Error::NoColumns)));
        assert!(matches!(
            DataMatrix::new(array![[1.0], [f64::NAN]]),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn spearman_hand_example() {
        let rho = spearman(&dm(array![[1.0, 3.0], [2.0, 1.0], [3.0, 2.0]]), TiePolicy::Midrank)
            .unwrap();
        let v = rho.values();
        assert!((v[[0, 1]] + 0.5).abs() < 1e-15);
        assert!((v[[0, 0]] - 1.0).abs() < 1e-15 && (v[[1, 1]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_monotone_pair_is_one() {
        let rho = spearman(&dm(array![[1.0, 2.0], [2.0, 4.0], [3.0, 9.0]]), TiePolicy::Midrank)
            .unwrap();
        assert!((rho.values()[[0, 1]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_with_ties_keeps_unit_diagonal() {
        let rho = spearman(
            &dm(array![[5.0, 1.0], [5.0, 2.0], [1.0, 3.0], [2.0, 3.0]]),
            TiePolicy::Midrank,
        )
        .unwrap();
        assert!((rho.trace() - 2.0).abs() < 1e-12);
        assert!(rho.values()[[0, 1]].abs() <= 1.0);
    }

    #[test]
    fn spearman_constant_column_errors() {
        let err = spearman(&dm(array![[1.0, 4.0], [2.0, 4.0], [3.0, 4.0]]), TiePolicy::Midrank)
            .unwrap_err();
        assert!(matches!(err, Error::ZeroVariance { col: 1 }));
    }

    #[test]
    fn pearson_hand_example_and_dependence() {
        let r = pearson(&dm(array![[1.0, 3.0, -2.0], [2.0, 1.0, -4.0], [3.0, 2.0, -6.0]])).unwrap();
        assert!((r.values()[[0, 1]] + 0.5).abs() < 1e-14);
        assert!((r.values()[[0, 2]] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn pearson_names_zero_variance_column() {
        let err = pearson(&dm(array![[1.0, 0.1], [2.0, 0.1], [3.0, 0.1]])).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance { col: 1 }));
    }

    #[test]
    fn covariance_divisor_is_n() {
        let s = covariance(&dm(array![[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])).unwrap();
        assert!((s.values()[[0, 0]] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.values()[[1, 1]], 0.0);
        assert_eq!(s.values()[[0, 1]], 0.0);
    }

    #[test]
    fn mkendall_small_cases() {
        let k = mkendall(&dm(array![[1.0, 2.0, 0.0], [3.0, -1.0, 2.0]])).unwrap();
        assert!((k.trace() - 1.0).abs() < 1e-15);
        // single pair: normalized outer product of d = (-2, 3, -2)
        let d = [-2.0, 3.0, -2.0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.values()[[i, j]] - d[i] * d[j] / 17.0).abs() < 1e-15);
            }
        }
        let k1 = mkendall(&dm(array![[1.0], [4.0], [-2.0], [0.5]])).unwrap();
        assert!((k1.values()[[0, 0]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mkendall_duplicate_rows_error() {
        let err = mkendall(&dm(array![[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])).unwrap_err();
        assert!(matches!(err, Error::DuplicateRows { first: 0, second: 2 }));
    }
}
