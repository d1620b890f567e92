//! Seeded synthesis of random problem instances for sweeps and tests.
//!
//! Everything here is deterministic given the RNG state, so property sweeps
//! can be replayed from a single recorded seed.

use rand::Rng;

use crate::error::Result;
use crate::model::{NonnegMatrix, RealMatrix};

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "need 0 < lo < hi and n >= 2");
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (llo + (lhi - llo) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn positive_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn real_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random strictly positive matrix; entries uniform in [0.05, 1).
pub fn random_nonneg_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> NonnegMatrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(0.05..1.0))
        .collect();
    NonnegMatrix::new(rows, cols, data).expect("positive entries cannot fail validation")
}

/// Random positive matrix with unit column sums.
pub fn random_normalized_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> NonnegMatrix {
    let p = random_nonneg_matrix(rng, rows, cols);
    let s = p.col_sums().to_vec();
    let data: Vec<f64> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| p.get(i, j) / s[j])
        .collect();
    NonnegMatrix::new(rows, cols, data).expect("normalization keeps entries positive")
}

/// Random real matrix with entries uniform in [-1, 1); columns with tiny
/// square-sums are bumped so the instance stays well posed.
pub fn random_real_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> RealMatrix {
    let mut data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    for j in 0..cols {
        let c: f64 = (0..rows).map(|i| data[i * cols + j].powi(2)).sum();
        if c < 1e-3 {
            data[j % rows * cols + j] += 1.0;
        }
    }
    RealMatrix::new(rows, cols, data).expect("bumped columns have positive square sums")
}

/// Random KL-family instance: normalized positive matrix, positive data,
/// positive start. With `consistent` the data is an exact product P·x_true.
pub fn random_kl_instance<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    consistent: bool,
) -> Result<(NonnegMatrix, Vec<f64>, Vec<f64>)> {
    let p = random_normalized_matrix(rng, rows, cols);
    let y = if consistent {
        let x_true = positive_vec(rng, cols, 0.5, 2.0);
        p.mul(&x_true)?
    } else {
        positive_vec(rng, rows, 0.5, 2.0)
    };
    let x0 = positive_vec(rng, cols, 0.5, 2.0);
    Ok((p, y, x0))
}

/// Random least-squares instance. With `consistent` the data is an exact
/// product A·x_true.
pub fn random_euclid_instance<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    consistent: bool,
) -> Result<(RealMatrix, Vec<f64>, Vec<f64>)> {
    let a = random_real_matrix(rng, rows, cols);
    let b = if consistent {
        let x_true = real_vec(rng, cols, -2.0, 2.0);
        a.mul(&x_true)?
    } else {
        real_vec(rng, rows, -2.0, 2.0)
    };
    let x0 = real_vec(rng, cols, -1.0, 1.0);
    Ok((a, b, x0))
}
