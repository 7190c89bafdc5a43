//! Lanczos eigensolver for the low end of a real symmetric operator.
//!
//! The operator is only touched through `y = H x`. Each Krylov run keeps its
//! whole basis and reorthogonalises every new vector against it twice
//! (classical Gram–Schmidt, two passes). A single starting vector sees only
//! one copy of each degenerate eigenspace, so converged Ritz pairs are locked
//! and further runs are started in their orthogonal complement until a run
//! finds nothing below the current `k`-th value. That recovers
//! multiplicities, which the MIS spectra have in abundance.

use nalgebra::DMatrix;
use rand::Rng as _;

use super::tridiag::tridiagonal_eigen;
use crate::rng::{rng_from_seed, Rng};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Ritz values beyond `k` inspected when deciding convergence.
const EXTRA_RITZ: usize = 6;
const CHECK_EVERY: usize = 10;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub tol: f64,
    /// Iteration cap per Krylov run; `None` means `20·√dim + 200`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: None, seed: 0x5eed }
    }
}

/// The `k` lowest eigenvalues (with multiplicity), ascending.
pub fn lanczos_lowest<F>(matvec: F, dim: usize, k: usize, tol: f64, seed: u64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    lanczos_with(matvec, dim, k, &LanczosOptions { tol, max_iter: None, seed })
}

pub fn lanczos_with<F>(matvec: F, dim: usize, k: usize, opts: &LanczosOptions) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    if k == 0 || k > dim {
        return Err(Error::param(format!("requested {k} eigenvalues of a {dim}-dim operator")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let max_iter = opts
        .max_iter
        .unwrap_or_else(|| 20 * (dim as f64).sqrt().ceil() as usize + 200);
    let mut rng = rng_from_seed(opts.seed);
    let mut locked_values: Vec<f64> = Vec::new();
    let mut locked_vectors: Vec<Vec<f64>> = Vec::new();

    while locked_vectors.len() < dim {
        let goal = if locked_values.len() < k {
            Goal::Fill(k - locked_values.len())
        } else {
            let mut sorted = locked_values.clone();
            sorted.sort_by(f64::total_cmp);
            Goal::Below(sorted[k - 1] - opts.tol)
        };
        let found = krylov_run(&matvec, dim, &locked_vectors, goal, opts.tol, max_iter, &mut rng)?;
        if found.is_empty() {
            break;
        }
        for (value, vector) in found {
            locked_values.push(value);
            locked_vectors.push(vector);
        }
    }

    locked_values.sort_by(f64::total_cmp);
    locked_values.truncate(k);
    Ok(locked_values)
}

#[derive(Clone, Copy, Debug)]
enum Goal {
    /// Converge this many of the lowest Ritz pairs.
    Fill(usize),
    /// Converge every Ritz pair below the bound; stop empty-handed once the
    /// lowest converged value sits at or above it.
    Below(f64),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], locked: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in locked.iter().chain(basis) {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

fn krylov_run<F>(
    matvec: &F,
    dim: usize,
    locked: &[Vec<f64>],
    goal: Goal,
    tol: f64,
    max_iter: usize,
    rng: &mut Rng,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let space = dim - locked.len();
    let steps = max_iter.min(space);

    let mut q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    orthogonalize(&mut q, &[], locked);
    let norm = dot(&q, &q).sqrt();
    if norm < 1e-10 {
        return Ok(Vec::new());
    }
    q.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut scale = 0.0f64;
    let mut last_residuals = Vec::new();

    for j in 0..steps {
        matvec(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&mut w, &basis, locked);
        let b = dot(&w, &w).sqrt();
        scale = scale.max(a.abs() + b + beta.last().copied().unwrap_or(0.0));
        let exhausted = b <= 1e-12 * scale.max(1.0) || j + 1 == space;
        let m = j + 1;

        if m % CHECK_EVERY == 0 || exhausted || m == steps {
            let eig = tridiagonal_eigen(&alpha, &beta, &[m - 1])?;
            let resid: Vec<f64> = eig.rows[0]
                .iter()
                .map(|z| if exhausted { 0.0 } else { (b * z).abs() })
                .collect();
            let window = match goal {
                Goal::Fill(want) => (want + EXTRA_RITZ).min(m),
                Goal::Below(_) => m,
            };
            let selected: Option<Vec<usize>> = match goal {
                Goal::Fill(want) => {
                    let take = want.min(m);
                    let done = (0..take).all(|i| resid[i] <= tol);
                    (done && (take == want || exhausted)).then(|| (0..take).collect())
                }
                Goal::Below(bound) => {
                    let below: Vec<usize> = (0..m).filter(|&i| eig.values[i] < bound).collect();
                    let lowest_ok = resid[0] <= tol;
                    if below.is_empty() {
                        lowest_ok.then(Vec::new)
                    } else {
                        below.iter().all(|&i| resid[i] <= tol).then_some(below)
                    }
                }
            };
            last_residuals = resid[..window].to_vec();
            if let Some(sel) = selected {
                return Ok(ritz_pairs(&alpha, &beta, &basis, &sel));
            }
            if exhausted {
                // Invariant subspace with nothing new to offer in this goal.
                let all: Vec<usize> = match goal {
                    Goal::Fill(want) => (0..want.min(m)).collect(),
                    Goal::Below(bound) => (0..m).filter(|&i| eig.values[i] < bound).collect(),
                };
                return Ok(ritz_pairs(&alpha, &beta, &basis, &all));
            }
        }
        if exhausted || m == steps {
            break;
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|v| v / b).collect();
        basis.push(next);
    }
    Err(Error::Convergence { iterations: steps, residuals: last_residuals })
}

fn ritz_pairs(alpha: &[f64], beta: &[f64], basis: &[Vec<f64>], selected: &[usize]) -> Vec<(f64, Vec<f64>)> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = basis[0].len();
    selected
        .iter()
        .map(|&i| {
            let col = order[i];
            let mut v = vec![0.0; dim];
            for (l, q) in basis.iter().take(m).enumerate() {
                axpy(eig.eigenvectors[(l, col)], q, &mut v);
            }
            let norm = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            (eig.eigenvalues[col], v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{regular_mis, GroverInstance, ProblemInstance};
    use crate::spectra::dense::dense_spectrum;
    use crate::spectra::operator::{build_operator, OperatorKind};

    fn transverse(n: usize) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = -(0..n).map(|q| x[i ^ (1 << q)]).sum::<f64>();
            }
        }
    }

    #[test]
    fn identity_is_degenerate_but_terminates() {
        let id = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        let ev = lanczos_lowest(id, 50, 2, 1e-10, 1).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transverse_field_known_values() {
        let ev = lanczos_lowest(transverse(12), 1 << 12, 2, 1e-8, 3).unwrap();
        assert!((ev[0] + 12.0).abs() < 1e-8);
        assert!((ev[1] + 10.0).abs() < 1e-8);
        let ev = lanczos_lowest(transverse(6), 64, 4, 1e-8, 3).unwrap();
        for (a, b) in ev.iter().zip([-6.0, -4.0, -4.0, -4.0]) {
            assert!((a - b).abs() < 1e-8, "{ev:?}");
        }
    }

    #[test]
    fn agrees_with_dense_on_mis() {
        let p = ProblemInstance::Mis(regular_mis(8, 3, 2000.0, 17).unwrap());
        for s in [0.0, 0.3, 0.7, 0.9, 1.0] {
            let op = build_operator(&p, s, OperatorKind::MixerInterpolation).unwrap();
            let dense = dense_spectrum(&op, 3).unwrap();
            let lz = lanczos_lowest(|x, y| op.apply(x, y), op.dim(), 3, 1e-8, 9).unwrap();
            for (a, b) in dense.iter().zip(&lz) {
                assert!((a - b).abs() < 1e-8, "s={s}: {dense:?} vs {lz:?}");
            }
        }
    }

    #[test]
    fn small_krylov_space_projector() {
        let p = ProblemInstance::Grover(GroverInstance::new(7, 77).unwrap());
        let op = build_operator(&p, 0.4, OperatorKind::GroverProjector).unwrap();
        let lz = lanczos_lowest(|x, y| op.apply(x, y), op.dim(), 3, 1e-10, 2).unwrap();
        let dense = dense_spectrum(&op, 3).unwrap();
        for (a, b) in dense.iter().zip(&lz) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn iteration_cap_reports_residuals() {
        let p = ProblemInstance::Mis(regular_mis(10, 3, 2000.0, 2).unwrap());
        let op = build_operator(&p, 0.5, OperatorKind::MixerInterpolation).unwrap();
        let opts = LanczosOptions { tol: 1e-12, max_iter: Some(12), seed: 1 };
        match lanczos_with(|x, y| op.apply(x, y), op.dim(), 3, &opts) {
            Err(Error::Convergence { iterations, residuals }) => {
                assert_eq!(iterations, 12);
                assert!(!residuals.is_empty());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let id = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        assert!(lanczos_lowest(id, 3, 0, 1e-8, 0).is_err());
        assert!(lanczos_lowest(id, 3, 4, 1e-8, 0).is_err());
    }
}
