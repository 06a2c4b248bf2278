//! Dense kernels: Householder tridiagonalization with implicit QL for
//! symmetric matrices, and an LU solve. All loops run in a fixed order so
//! results are bit-reproducible.

use ndarray::Array2;

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 64;

/// Eigenvalues in descending order, with eigenvectors as matching columns
/// when requested.
pub(crate) struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Array2<f64>>,
}

/// Full eigendecomposition of a symmetric matrix. Only the lower triangle
/// is trusted through the symmetric rank-two updates, but the whole matrix
/// is read, so callers must pass a symmetric input.
pub(crate) fn symmetric_eigen(a: &Array2<f64>, want_vectors: bool) -> Result<SymmetricEigen> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if p == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| Array2::zeros((0, 0))),
        });
    }

    let mut work: Vec<f64> = a.iter().copied().collect();
    let mut reflectors = Vec::new();
    let (mut diag, mut off) = tridiagonalize(&mut work, p, &mut reflectors);

    let mut z = if want_vectors {
        let mut id = vec![0.0; p * p];
        for i in 0..p {
            id[i * p + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    tridiagonal_ql(&mut diag, &mut off, z.as_deref_mut(), p)?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();

    let vectors = z.map(|mut z| {
        // back-transform: columns of Q z with Q = H_0 H_1 ... H_{p-3}
        for (k, v) in reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let offset = k + 1;
            for col in 0..p {
                let mut s = 0.0;
                for (i, vi) in v.iter().enumerate() {
                    s += vi * z[(offset + i) * p + col];
                }
                s *= 2.0;
                for (i, vi) in v.iter().enumerate() {
                    z[(offset + i) * p + col] -= s * vi;
                }
            }
        }
        Array2::from_shape_fn((p, p), |(r, c)| z[r * p + order[c]])
    });

    Ok(SymmetricEigen { values, vectors })
}

/// Reduces the row-major `p x p` matrix in `m` to tridiagonal form.
/// Returns `(diagonal, off_diagonal)` where `off_diagonal[i]` couples
/// `i` and `i + 1` and the last entry is zero. Unit Householder vectors are
/// pushed to `reflectors` (empty when the column was already reduced).
fn tridiagonalize(m: &mut [f64], p: usize, reflectors: &mut Vec<Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; p];
    let mut off = vec![0.0; p];

    for k in 0..p.saturating_sub(2) {
        let len = p - k - 1;
        let start = k + 1;
        let mut v: Vec<f64> = (0..len).map(|i| m[(start + i) * p + k]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        diag[k] = m[k * p + k];
        if norm == 0.0 {
            off[k] = 0.0;
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= vnorm;
        }

        // B <- H B H on the trailing block, H = I - 2 v v^T
        let mut w = vec![0.0; len];
        for i in 0..len {
            let row = &m[(start + i) * p + start..(start + i) * p + p];
            w[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let kappa: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let q: Vec<f64> = w.iter().zip(&v).map(|(wi, vi)| wi - kappa * vi).collect();
        for i in 0..len {
            let (vi, qi) = (2.0 * v[i], 2.0 * q[i]);
            let row = &mut m[(start + i) * p + start..(start + i) * p + p];
            for (j, x) in row.iter_mut().enumerate() {
                *x -= vi * q[j] + qi * v[j];
            }
        }

        off[k] = alpha;
        reflectors.push(v);
    }

    if p >= 2 {
        diag[p - 2] = m[(p - 2) * p + (p - 2)];
        off[p - 2] = m[(p - 1) * p + (p - 2)];
        diag[p - 1] = m[(p - 1) * p + (p - 1)];
    } else {
        diag[0] = m[0];
    }
    off[p - 1] = 0.0;
    (diag, off)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (eigenvalues land in
/// `d`, unsorted). When `z` is given, rotations are accumulated into its
/// columns.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, p: usize) -> Result<()> {
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..p {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < p {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[p-1] == 0 guarantees m < p

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::EigenNoConvergence { index: l, iterations: MAX_QL_SWEEPS });
                }

                let g = d[l];
                let mut pp = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = pp.hypot(1.0);
                if pp < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (pp + r);
                d[l + 1] = e[l] * (pp + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(p).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                pp = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * pp;
                    r = pp.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = pp / r;
                    pp = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..p {
                            let zk1 = z[k * p + i + 1];
                            let zk = z[k * p + i];
                            z[k * p + i + 1] = s * zk + c * zk1;
                            z[k * p + i] = c * zk - s * zk1;
                        }
                    }
                }
                pp = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * pp;
                d[l] = c * pp;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Solves `a x = b` for a square `a` by LU with partial pivoting.
pub(crate) fn lu_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let p = a.nrows();
    if a.ncols() != p || b.nrows() != p {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve {}x{} system against {}x{} right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let scale = a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let tol = scale * (p as f64) * f64::EPSILON;

    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..p {
        let (piv, piv_val) = (k..p)
            .map(|r| (r, lu[[r, k]].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_val <= tol {
            return Err(Error::Singular);
        }
        if piv != k {
            for c in 0..p {
                lu.swap([k, c], [piv, c]);
            }
            for c in 0..x.ncols() {
                x.swap([k, c], [piv, c]);
            }
        }
        for r in k + 1..p {
            let factor = lu[[r, k]] / lu[[k, k]];
            if factor == 0.0 {
                continue;
            }
            for c in k..p {
                lu[[r, c]] -= factor * lu[[k, c]];
            }
            for c in 0..x.ncols() {
                x[[r, c]] -= factor * x[[k, c]];
            }
        }
    }
    for k in (0..p).rev() {
        for c in 0..x.ncols() {
            let mut s = x[[k, c]];
            for j in k + 1..p {
                s -= lu[[k, j]] * x[[j, c]];
            }
            x[[k, c]] = s / lu[[k, k]];
        }
    }
    Ok(x)
}
