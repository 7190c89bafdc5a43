//! Implicit QL iteration for symmetric tridiagonal matrices.
//!
//! Only selected rows of the eigenvector matrix are accumulated, which is all
//! the Lanczos residual estimate needs (the last row) and keeps a convergence
//! check at O(m²).

use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `rows[r][j]` is component `tracked[r]` of eigenvector `j`.
    pub rows: Vec<Vec<f64>>,
}

/// Eigen-decomposition of the tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], tracked: &[usize]) -> Result<TridiagonalEigen> {
    let m = diag.len();
    if m == 0 {
        return Ok(TridiagonalEigen { values: Vec::new(), rows: vec![Vec::new(); tracked.len()] });
    }
    if off.len() + 1 < m {
        return Err(Error::param("off-diagonal too short"));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; m];
    e[..m - 1].copy_from_slice(&off[..m - 1]);
    let mut z: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; m];
            row[r] = 1.0;
            row
        })
        .collect();

    for l in 0..m {
        let mut sweeps = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Convergence { iterations: sweeps, residuals: vec![e[l].abs()] });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&j| d[j]).collect(),
        rows: z.iter().map(|row| order.iter().map(|&j| row[j]).collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::Rng;

    #[test]
    fn matches_dense_solver() {
        let mut rng = crate::rng::rng_from_seed(3);
        for m in [1usize, 2, 3, 7, 40] {
            let d: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
            let e: Vec<f64> = (0..m.saturating_sub(1)).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = d[i];
                if i + 1 < m {
                    t[(i, i + 1)] = e[i];
                    t[(i + 1, i)] = e[i];
                }
            }
            let dense = t.clone().symmetric_eigen();
            let mut expected: Vec<(f64, f64)> = (0..m)
                .map(|j| (dense.eigenvalues[j], dense.eigenvectors[(m - 1, j)].abs()))
                .collect();
            expected.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ours = tridiagonal_eigen(&d, &e, &[m - 1]).unwrap();
            for j in 0..m {
                assert!((ours.values[j] - expected[j].0).abs() < 1e-11);
                assert!((ours.rows[0][j].abs() - expected[j].1).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn handles_zero_coupling() {
        let ev = tridiagonal_eigen(&[3.0, 1.0, 2.0], &[0.0, 0.0], &[2]).unwrap();
        assert_eq!(ev.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(ev.rows[0], vec![0.0, 1.0, 0.0]);
    }
}
