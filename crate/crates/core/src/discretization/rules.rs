//! One-dimensional rules and the collapsed simplex rule used to build the
//! product grids.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[a, b]`, in increasing node order.
pub(crate) fn gauss_legendre(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(m).expect("rule order must be >= 1"));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

/// Gauss-Legendre in `x` after the substitution `y = s sinh(x)`, mapped onto `[a, b]`.
///
/// Nodes cluster within `O(s)` of zero and are log-spaced for `|y| >> s`.
pub(crate) fn sinh_mapped(m: usize, a: f64, b: f64, s: f64) -> Vec<(f64, f64)> {
    let xa = (a / s).asinh();
    let xb = (b / s).asinh();
    gauss_legendre(m, xa, xb)
        .into_iter()
        .map(|(x, w)| (s * x.sinh(), w * s * x.cosh()))
        .collect()
}

/// Periodic trapezoid rule on `[0, 2 pi)`: `m` equispaced angles with weight `2 pi / m`.
pub(crate) fn periodic(m: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / m as f64;
    (0..m).map(|k| (k as f64 * h, h)).collect()
}

/// Product rule on the standard simplex `{lambda in R^{k+1}_+ : sum lambda = 1}`
/// in the `k` free coordinates, built from Gauss-Legendre by collapsed
/// coordinates `lambda_i = x_i prod_{j<i} (1 - x_j)`.
///
/// Weights sum to `1/k!`, the Lebesgue measure of the simplex in its free coordinates.
pub(crate) fn simplex(k: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    if k == 0 {
        return vec![(vec![1.0], 1.0)];
    }
    let base = gauss_legendre(m, 0.0, 1.0);
    let mut out = Vec::with_capacity(m.pow(k as u32));
    let mut idx = vec![0usize; k];
    loop {
        let mut lambda = Vec::with_capacity(k + 1);
        let mut rest = 1.0;
        let mut weight = 1.0;
        for (i, &ix) in idx.iter().enumerate() {
            let (x, w) = base[ix];
            lambda.push(x * rest);
            weight *= w * (1.0 - x).powi((k - 1 - i) as i32);
            rest *= 1.0 - x;
        }
        lambda.push(rest);
        out.push((lambda, weight));

        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
        }
    }
}
