#![allow(dead_code)]

use crhls::discretization::{KernelMatrix, QuadratureGrid};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonnegative kernel with uniform entries in `[0, 1)` and random weights in `[0.5, 1.5)`.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> (KernelMatrix, QuadratureGrid) {
    let entries = (0..n * n).map(|_| rng.random_range(0.0..1.0)).collect();
    let weights = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    (
        KernelMatrix::from_entries(n, entries).unwrap(),
        QuadratureGrid::discrete(weights).unwrap(),
    )
}

/// Quotient evaluated from scratch, without the library's functional module.
pub fn quotient(k: &[f64], w: &[f64], f: &[f64], p: f64) -> f64 {
    let n = w.len();
    let mut b = 0.0;
    for i in 0..n {
        for j in 0..n {
            b += k[i * n + j] * f[i] * f[j] * w[i] * w[j];
        }
    }
    let norm: f64 = f
        .iter()
        .zip(w)
        .map(|(f, w)| f.powf(p) * w)
        .sum::<f64>()
        .powf(1.0 / p);
    b / (norm * norm)
}

fn for_each_point(lo: &[f64], hi: &[f64], m: usize, mut visit: impl FnMut(&[f64])) {
    let n = lo.len();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    loop {
        for d in 0..n {
            x[d] = lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / (m - 1) as f64;
        }
        visit(&x);
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            return;
        }
    }
}

/// Exhaustive grid search for the maximizer of the quotient over `[0, 1]^N`
/// (the quotient is scale-invariant), followed by shrinking local grids.
/// Returns `(D, f)` with `||f||_p = 1`.
pub fn brute_force(k: &[f64], w: &[f64], p: f64) -> (f64, Vec<f64>) {
    let n = w.len();
    let mut best = (f64::NEG_INFINITY, vec![1.0; n]);
    let consider = |x: &[f64], best: &mut (f64, Vec<f64>)| {
        if x.iter().all(|v| *v == 0.0) {
            return;
        }
        let q = quotient(k, w, x, p);
        if q > best.0 {
            *best = (q, x.to_vec());
        }
    };
    for_each_point(&vec![0.0; n], &vec![1.0; n], 21, |x| consider(x, &mut best));
    let mut half = 0.05;
    for _ in 0..60 {
        let c = best.1.clone();
        let lo: Vec<f64> = c.iter().map(|v| (v - half).max(0.0)).collect();
        let hi: Vec<f64> = c.iter().map(|v| (v + half).min(1.0)).collect();
        for_each_point(&lo, &hi, 7, |x| consider(x, &mut best));
        half *= 0.7;
    }
    let norm: f64 = best
        .1
        .iter()
        .zip(w)
        .map(|(f, w)| f.powf(p) * w)
        .sum::<f64>()
        .powf(1.0 / p);
    (best.0, best.1.iter().map(|v| v / norm).collect())
}
