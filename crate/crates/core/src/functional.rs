//! Norms, the HLS bilinear form, Rayleigh quotients, the Young operator bound
//! and the tail integral of the truncated extremal family.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discretization::rules;
use crate::discretization::{KernelMatrix, Nodes, QuadratureGrid};
use crate::error::{check_len, domain, Error, Result};
use crate::heisenberg::extremal_family_parts;
use crate::numerics::{sharp_constant_dh, Params};
use crate::sum::neumaier;

/// Values of a function at the nodes of a [`QuadratureGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!(
                "grid function values must be finite (got {v})"
            )));
        }
        Ok(Self(values))
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }
}

impl From<GridFunction> for Vec<f64> {
    fn from(f: GridFunction) -> Self {
        f.0
    }
}

/// `(sum_i |f_i|^p w_i)^{1/p}`.
pub fn lp_norm(f: &GridFunction, grid: &QuadratureGrid, p: f64) -> Result<f64> {
    check_len(grid.len(), f.len())?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(domain(format!("L^p norm needs p >= 1 (got {p})")));
    }
    Ok(weighted_lp(f.values(), &grid.weights, p))
}

/// Unchecked `L^p` norm.
pub(crate) fn weighted_lp(f: &[f64], w: &[f64], p: f64) -> f64 {
    neumaier(f.iter().zip(w).map(|(v, w)| v.abs().powf(p) * w)).powf(1.0 / p)
}

pub(crate) fn weighted_dot(f: &[f64], g: &[f64], w: &[f64]) -> f64 {
    neumaier(f.iter().zip(g).zip(w).map(|((a, b), w)| a * b * w))
}

/// `sum_ij f_i K_ij g_j w_i w_j`, the full double sum.
pub fn bilinear_form(
    kernel: &KernelMatrix,
    grid: &QuadratureGrid,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<f64> {
    check_len(kernel.dim(), grid.len())?;
    check_len(grid.len(), f.len())?;
    check_len(grid.len(), g.len())?;
    let kg = kernel.apply(g.values(), &grid.weights);
    Ok(weighted_dot(f.values(), &kg, &grid.weights))
}

/// `|B(f, f)| / ||f||_p^2`.
pub fn rayleigh_quotient(
    kernel: &KernelMatrix,
    grid: &QuadratureGrid,
    f: &GridFunction,
    p: f64,
) -> Result<f64> {
    let norm = lp_norm(f, grid, p)?;
    if norm == 0.0 {
        return Err(domain("Rayleigh quotient of the zero function"));
    }
    Ok(bilinear_form(kernel, grid, f, f)?.abs() / (norm * norm))
}

/// Largest `L^r` mass over rows and columns: `max (sum K^r w)^{1/r}`.
///
/// With `1/q = 1/p + 1/r - 1` the operator `f -> K (f w)` then satisfies
/// `||K f||_q <= C ||f||_p`.
pub fn young_bound(kernel: &KernelMatrix, grid: &QuadratureGrid, r: f64) -> Result<f64> {
    check_len(kernel.dim(), grid.len())?;
    if !(r >= 1.0) || !r.is_finite() {
        return Err(domain(format!("Young bound needs r >= 1 (got {r})")));
    }
    let n = kernel.dim();
    let w = &grid.weights;
    let row_max = (0..n)
        .map(|i| neumaier(kernel.row(i).iter().zip(w).map(|(k, w)| k.powf(r) * w)))
        .fold(0.0f64, f64::max);
    let col_max = (0..n)
        .map(|j| neumaier((0..n).map(|i| kernel.get(i, j).powf(r) * w[i])))
        .fold(0.0f64, f64::max);
    Ok(row_max.max(col_max).powf(1.0 / r))
}

/// `f_eps` sampled at the nodes of a cylinder grid.
pub fn sample_extremal_family(
    grid: &QuadratureGrid,
    eps: f64,
    params: &Params,
) -> Result<GridFunction> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain(format!("eps must be > 0 (got {eps})")));
    }
    let Nodes::Cylinder(nodes) = &grid.nodes else {
        return Err(Error::Grid(
            "the extremal family is sampled on cylinder grids".into(),
        ));
    };
    if grid.n != params.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            got: params.n,
        });
    }
    Ok(GridFunction(
        nodes
            .iter()
            .map(|u| extremal_family_parts(eps, u.z_norm_sqr(), u.t, params))
            .collect(),
    ))
}

/// Rule orders for [`tail_integral_i1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailResolution {
    pub radial: usize,
    pub vertical: usize,
    /// The complement of `Sigma_R` is truncated to `Sigma_{outer_factor R}`.
    pub outer_factor: f64,
}

impl Default for TailResolution {
    fn default() -> Self {
        Self {
            radial: 64,
            vertical: 64,
            outer_factor: 8.0,
        }
    }
}

/// `||H||_q^q = pi^{n+1}` in `dV_0`, since `H^q = J_Cayley / 2^{2n+1}`.
fn extremal_norm_q(params: &Params) -> f64 {
    PI.powi(params.n as i32 + 1).powf(1.0 / params.q_alpha)
}

/// Tail integral `I_1 = C int_{Sigma_R^c} f_eps^q dV_0` with
/// `C = 2 D_H ||H||_q^{2-q}`, the Euler-Lagrange constant of the extremal.
///
/// The complement is truncated to `Sigma_{kR} \ Sigma_R` and split into
/// `{R <= |z| < kR, |t| < k^2 R^2}` and `{|z| < R, R^2 <= |t| < k^2 R^2}`;
/// the integrand is radial in `z`, so each piece is a two-dimensional rule.
pub fn tail_integral_i1(
    eps: f64,
    radius: f64,
    params: &Params,
    res: TailResolution,
) -> Result<f64> {
    if !(eps > 0.0) || !(radius > eps) || !radius.is_finite() {
        return Err(domain(format!(
            "tail integral needs 0 < eps < R (got eps = {eps}, R = {radius})"
        )));
    }
    let TailResolution {
        radial,
        vertical,
        outer_factor: k,
    } = res;
    if radial < 2 || vertical < 2 || !(k > 1.0) {
        return Err(domain(
            "tail resolution needs radial, vertical >= 2 and outer_factor > 1",
        ));
    }
    let n = params.n as i32;
    let q = params.q_alpha;
    let factorial: f64 = (1..=params.n).map(|j| j as f64).product();
    // dV_0 = 4^n n! du and du_z = |S^{2n-1}| r^{2n-1} dr.
    let sphere_area = 2.0 * PI.powi(n) / (factorial / params.n as f64);
    let measure = 4f64.powi(n) * factorial * sphere_area;
    let integrand =
        |r: f64, t: f64| extremal_family_parts(eps, r * r, t, params).powf(q) * r.powi(2 * n - 1);
    let log_rule = |m: usize, a: f64, b: f64| -> Vec<(f64, f64)> {
        rules::gauss_legendre(m, a.ln(), b.ln())
            .into_iter()
            .map(|(x, w)| (x.exp(), w * x.exp()))
            .collect()
    };
    let outer = k * radius;
    let t_max = outer * outer;

    // |t| < k^2 R^2 is symmetric in t: integrate t >= 0 and double.
    let mut piece_a = Vec::with_capacity(radial * vertical);
    for (r, wr) in log_rule(radial, radius, outer) {
        for (t, wt) in rules::sinh_mapped(vertical, 0.0, t_max, r * r) {
            piece_a.push(2.0 * wr * wt * integrand(r, t));
        }
    }
    let mut piece_b = Vec::with_capacity(radial * vertical);
    for (r, wr) in rules::gauss_legendre(radial, 0.0, radius) {
        for (t, wt) in log_rule(vertical, radius * radius, t_max) {
            piece_b.push(2.0 * wr * wt * integrand(r, t));
        }
    }
    let integral = measure * (neumaier(piece_a) + neumaier(piece_b));
    let constant = 2.0 * sharp_constant_dh(params) * extremal_norm_q(params).powf(2.0 - q);
    Ok(constant * integral)
}
