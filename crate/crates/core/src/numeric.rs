//! Deterministic numeric kernels: pairwise summation and power iteration.
//!
//! All reductions here split by index, never by worker, so results are
//! bit-identical regardless of thread count.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const PAIRWISE_BASE: usize = 32;

/// Pairwise (cascade) sum of `f(i)` for `i` in `0..len`.
///
/// Fixed recursive splitting keeps the rounding pattern independent of the
/// caller's parallelism and tightens the error bound to O(log n) ulps.
pub fn pairwise_map_sum<F: Fn(usize) -> f64>(len: usize, f: &F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= PAIRWISE_BASE {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, len, f)
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_map_sum(xs.len(), &|i| xs[i])
}

/// Pairwise dot product.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    pairwise_map_sum(a.len(), &|i| a[i] * b[i])
}

/// Euclidean norm via pairwise summation.
pub fn euclidean_norm(xs: &[f64]) -> f64 {
    pairwise_map_sum(xs.len(), &|i| xs[i] * xs[i]).sqrt()
}

/// Relative tolerance used by [`power_iteration_sym`] callers in this crate.
pub const POWER_ITER_RTOL: f64 = 1e-10;
/// Iteration cap for power iteration.
pub const POWER_ITER_CAP: usize = 100_000;

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration.
///
/// Deterministic by construction: the start vector is all-ones, and the
/// restart perturbation (used when the iterate collapses or the Rayleigh
/// quotient stagnates at zero) comes from a fixed-seed generator.
pub fn power_iteration_sym(g: &Array2<f64>, rtol: f64, max_iter: usize) -> Result<f64> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(Error::Dimension(format!(
            "power iteration needs a square matrix, got {}x{}",
            n,
            g.ncols()
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }

    let matvec = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let row = g.row(i);
            out[i] = pairwise_map_sum(n, &|j| row[j] * v[j]);
        }
    };

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut lambda_prev = f64::NAN;
    let mut converged_streak = 0usize;
    let mut restarts = 0usize;

    for iter in 1..=max_iter {
        matvec(&v, &mut y);
        let lambda = pairwise_dot(&v, &y);
        let norm = euclidean_norm(&y);
        if norm == 0.0 || !norm.is_finite() {
            // Start vector annihilated by G (or orthogonal to its range):
            // perturb from a fixed stream and try again.
            if restarts >= 3 {
                return Ok(0.0);
            }
            restarts += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000 + restarts as u64);
            for x in v.iter_mut() {
                *x = rng.random::<f64>() - 0.5;
            }
            let vn = euclidean_norm(&v);
            for x in v.iter_mut() {
                *x /= vn;
            }
            lambda_prev = f64::NAN;
            converged_streak = 0;
            continue;
        }
        for i in 0..n {
            v[i] = y[i] / norm;
        }

        if lambda_prev.is_finite() {
            let diff = (lambda - lambda_prev).abs();
            if diff <= rtol * lambda.abs().max(f64::MIN_POSITIVE) {
                converged_streak += 1;
                if converged_streak >= 2 && iter >= 4 {
                    return Ok(lambda.max(0.0));
                }
            } else {
                converged_streak = 0;
            }
        }
        lambda_prev = lambda;
    }

    Err(Error::Convergence { last_estimate: lambda_prev, iterations: max_iter })
}

/// Squared spectral norm ‖M‖₂² of a dense rectangular matrix.
///
/// Runs power iteration on the smaller Gram matrix, applied implicitly as two
/// matrix-vector products per step so the Gram matrix is never materialized.
pub fn spectral_norm_sq(m: &Array2<f64>) -> Result<f64> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    // Iterate on the smaller side: G = M Mᵀ if rows ≤ cols, else G = Mᵀ M.
    let dim = rows.min(cols);
    let other = rows.max(cols);
    let row_side = rows <= cols;

    let mut scratch = vec![0.0; other];
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut y = vec![0.0; dim];
    let mut lambda_prev = f64::NAN;
    let mut converged_streak = 0usize;
    let mut restarts = 0usize;

    for iter in 1..=POWER_ITER_CAP {
        if row_side {
            // scratch = Mᵀ v, y = M scratch
            for j in 0..cols {
                let col = m.column(j);
                scratch[j] = pairwise_map_sum(rows, &|i| col[i] * v[i]);
            }
            for i in 0..rows {
                let row = m.row(i);
                y[i] = pairwise_map_sum(cols, &|j| row[j] * scratch[j]);
            }
        } else {
            // scratch = M v, y = Mᵀ scratch
            for i in 0..rows {
                let row = m.row(i);
                scratch[i] = pairwise_map_sum(cols, &|j| row[j] * v[j]);
            }
            for j in 0..cols {
                let col = m.column(j);
                y[j] = pairwise_map_sum(rows, &|i| col[i] * scratch[i]);
            }
        }

        let lambda = pairwise_dot(&v, &y);
        let norm = euclidean_norm(&y);
        if norm == 0.0 || !norm.is_finite() {
            if restarts >= 3 {
                return Ok(0.0);
            }
            restarts += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_1000 + restarts as u64);
            for x in v.iter_mut() {
                *x = rng.random::<f64>() - 0.5;
            }
            let vn = euclidean_norm(&v);
            for x in v.iter_mut() {
                *x /= vn;
            }
            lambda_prev = f64::NAN;
            converged_streak = 0;
            continue;
        }
        for i in 0..dim {
            v[i] = y[i] / norm;
        }

        if lambda_prev.is_finite() {
            let diff = (lambda - lambda_prev).abs();
            if diff <= POWER_ITER_RTOL * lambda.abs().max(f64::MIN_POSITIVE) {
                converged_streak += 1;
                if converged_streak >= 2 && iter >= 4 {
                    return Ok(lambda.max(0.0));
                }
            } else {
                converged_streak = 0;
            }
        }
        lambda_prev = lambda;
    }

    Err(Error::Convergence { last_estimate: lambda_prev, iterations: POWER_ITER_CAP })
}

/// Spectral norm ‖M‖₂.
pub fn spectral_norm(m: &Array2<f64>) -> Result<f64> {
    Ok(spectral_norm_sq(m)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64) * 0.1).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn power_iteration_identity() {
        let g = Array2::<f64>::eye(5);
        let lambda = power_iteration_sym(&g, 1e-12, 1000).unwrap();
        assert!((lambda - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_iteration_diagonal() {
        let g = Array2::from_diag(&ndarray::arr1(&[0.5, 2.0, 3.0, 0.1]));
        let lambda = power_iteration_sym(&g, 1e-12, 10_000).unwrap();
        assert!((lambda - 3.0).abs() < 1e-8, "lambda = {lambda}");
    }

    #[test]
    fn power_iteration_zero_matrix() {
        let g = Array2::<f64>::zeros((4, 4));
        assert_eq!(power_iteration_sym(&g, 1e-12, 100).unwrap(), 0.0);
    }

    #[test]
    fn spectral_norm_rectangular() {
        // M = [[3, 0, 0], [0, 4, 0]] has spectral norm 4.
        let m = array![[3.0, 0.0, 0.0], [0.0, 4.0, 0.0]];
        let s = spectral_norm(&m).unwrap();
        assert!((s - 4.0).abs() < 1e-9, "s = {s}");
    }

    #[test]
    fn spectral_norm_start_vector_orthogonal_to_range() {
        // All-ones start is orthogonal to the dominant eigenvector (1, -1);
        // restart perturbation must recover it.
        let m = array![[1.0, -1.0], [-1.0, 1.0]];
        let s = spectral_norm_sq(&m).unwrap();
        assert!((s - 4.0).abs() < 1e-8, "s = {s}");
    }
}
