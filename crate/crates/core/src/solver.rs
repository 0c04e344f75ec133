//! Subcritical extremal problem `D_{M,p} = sup B(f, f) / ||f||_p^2` on a kernel
//! matrix: fixed-point iteration on the Euler-Lagrange equation
//! `D f^{p-1} = S f` with `S = (K + K^T)/2`, continuation in `p`, and blow-up
//! rescaling diagnostics.

use serde::{Deserialize, Serialize};

use crate::discretization::{KernelMatrix, Nodes, QuadratureGrid};
use crate::error::{check_len, domain, Error, Result};
use crate::functional::{bilinear_form, weighted_dot, weighted_lp, GridFunction};
use crate::heisenberg::{extremal_h_parts, group_inv, group_mul, hdist_unchecked};
use crate::numerics::Params;
use crate::sphere::{cayley_inv, sphere_dist_sqr_unchecked, PoleAlignment, SpherePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

/// Starting point of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Uniform,
    /// Nonnegative, not identically zero.
    Given(GridFunction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalResult {
    pub p: f64,
    #[serde(rename = "D")]
    pub d_estimate: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Maximizer, nonnegative with `||f||_p = 1`.
    pub f: GridFunction,
    /// Quotient after each accepted step.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Open interval of admissible exponents for `kernel`.
pub fn subcritical_window(kernel: &KernelMatrix) -> (f64, f64) {
    match &kernel.params {
        Some(p) => (p.q_alpha, 2.0),
        None => (1.0, 2.0),
    }
}

fn check_p(kernel: &KernelMatrix, p: f64) -> Result<()> {
    let (lo, hi) = subcritical_window(kernel);
    if !(p > lo && p < hi) {
        return Err(domain(format!(
            "p must lie in the subcritical window ({lo}, {hi}) (got {p})"
        )));
    }
    Ok(())
}

struct Problem<'a> {
    kernel: &'a KernelMatrix,
    w: &'a [f64],
    p: f64,
}

impl Problem<'_> {
    fn normalize(&self, mut f: Vec<f64>) -> Vec<f64> {
        let norm = weighted_lp(&f, self.w, self.p);
        f.iter_mut().for_each(|v| *v /= norm);
        f
    }

    /// `S f` for normalized `f`, together with `D = <f, S f>_w`.
    fn evaluate(&self, f: &[f64]) -> (Vec<f64>, f64) {
        let kf = self.kernel.apply(f, self.w);
        let sf = if self.kernel.is_symmetric() {
            kf
        } else {
            let kt = self.kernel.apply_transpose(f, self.w);
            kf.iter().zip(&kt).map(|(a, b)| 0.5 * (a + b)).collect()
        };
        let d = weighted_dot(f, &sf, self.w);
        (sf, d)
    }

    /// `sup_i |2 D f_i^{p-1} - ((K + K^T) f)_i|`.
    fn residual(&self, f: &[f64], sf: &[f64], d: f64) -> f64 {
        f.iter()
            .zip(sf)
            .map(|(v, s)| (2.0 * d * v.powf(self.p - 1.0) - 2.0 * s).abs())
            .fold(0.0, f64::max)
    }
}

/// Maximizes `B(f, f) / ||f||_p^2` over nonnegative `f` for `p` in the subcritical window.
///
/// Each step maps `f` to `normalize_p(h^{1/(p-1)})` with `h = (1 - t) D f^{p-1} + t S f`,
/// starting from `t = 1` (the plain Euler-Lagrange map) and halving `t` until the
/// quotient does not decrease. Once the quotient is flat to round-off, a step must
/// also not increase the Euler-Lagrange residual. Non-convergence within
/// `max_iter` is reported in the result, not as an error.
pub fn solve_subcritical(
    kernel: &KernelMatrix,
    grid: &QuadratureGrid,
    p: f64,
    opts: SolverOptions,
    init: Init,
) -> Result<SubcriticalResult> {
    check_len(kernel.dim(), grid.len())?;
    check_p(kernel, p)?;
    if kernel.is_zero() {
        return Err(Error::Solver("kernel is identically zero".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(domain(format!("tol must be > 0 (got {})", opts.tol)));
    }
    let start = match init {
        Init::Uniform => vec![1.0; grid.len()],
        Init::Given(f) => {
            check_len(grid.len(), f.len())?;
            let v = f.into_values();
            if v.iter().any(|&x| x < 0.0) || v.iter().all(|&x| x == 0.0) {
                return Err(domain(
                    "initial guess must be nonnegative and not identically zero",
                ));
            }
            v
        }
    };
    let prob = Problem {
        kernel,
        w: &grid.weights,
        p,
    };
    let expo = 1.0 / (p - 1.0);

    let mut f = prob.normalize(start);
    let (mut sf, mut d) = prob.evaluate(&f);
    let mut residual = prob.residual(&f, &sf, d);
    let mut history = vec![d];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let h: Vec<f64> = if t == 1.0 {
                sf.clone()
            } else {
                f.iter()
                    .zip(&sf)
                    .map(|(v, s)| (1.0 - t) * d * v.powf(p - 1.0) + t * s)
                    .collect()
            };
            let g = prob.normalize(h.iter().map(|v| v.max(0.0).powf(expo)).collect());
            let (sg, dg) = prob.evaluate(&g);
            // Within round-off of the current quotient, the residual decides.
            let flat = dg <= d + 1e-13 * d.abs();
            if dg >= d - 1e-14 * d.abs() && (!flat || prob.residual(&g, &sg, dg) <= residual) {
                accepted = Some((g, sg, dg));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some((g, sg, dg)) = accepted else {
            break;
        };
        let change = (dg - d).abs() / dg.abs().max(f64::MIN_POSITIVE);
        f = g;
        sf = sg;
        d = dg;
        residual = prob.residual(&f, &sf, d);
        history.push(d);
        if change <= opts.tol && residual <= opts.tol * (1.0 + d) {
            converged = true;
            break;
        }
    }

    let f = GridFunction::new(f)?;
    let d_estimate = bilinear_form(kernel, grid, &f, &f)?.abs()
        / weighted_lp(f.values(), &grid.weights, p).powi(2);
    Ok(SubcriticalResult {
        p,
        d_estimate,
        residual,
        iterations,
        converged,
        f,
        history,
    })
}

/// Solves along a strictly decreasing schedule of exponents, warm-starting each
/// stage from the previous maximizer.
pub fn continuation(
    kernel: &KernelMatrix,
    grid: &QuadratureGrid,
    schedule: &[f64],
    opts: SolverOptions,
) -> Result<Vec<SubcriticalResult>> {
    if schedule.is_empty() {
        return Err(domain("continuation schedule is empty"));
    }
    if let Some(w) = schedule.windows(2).find(|w| !(w[1] < w[0])) {
        return Err(domain(format!(
            "continuation schedule must be strictly decreasing ({} then {})",
            w[0], w[1]
        )));
    }
    for &p in schedule {
        check_p(kernel, p)?;
    }
    let mut out: Vec<SubcriticalResult> = Vec::with_capacity(schedule.len());
    for &p in schedule {
        let init = match out.last() {
            Some(prev) => Init::Given(prev.f.clone()),
            None => Init::Uniform,
        };
        out.push(solve_subcritical(kernel, grid, p, opts, init)?);
    }
    Ok(out)
}

/// The default continuation schedule `1.8, 1.6, 1.45, 1.36, q_alpha + 0.001`,
/// restricted to the window `(q_alpha, 2)`.
pub fn default_schedule(params: &Params) -> Vec<f64> {
    let q = params.q_alpha;
    let mut s: Vec<f64> = [1.8, 1.6, 1.45, 1.36]
        .into_iter()
        .filter(|&p| p > q + 0.001)
        .collect();
    s.push(q + 0.001);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub node: usize,
    /// Distance from the center node.
    pub distance: f64,
    /// Rescaled iterate `g_p = f / f_max`.
    pub value: f64,
    /// `H` at the rescaled local coordinate of the node.
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub mu_p: f64,
    pub center_index: usize,
    pub profile: Vec<ProfileSample>,
    /// `max |g_p - H(delta_{1/mu_p} u)|` over the sampled nodes.
    pub profile_deviation: f64,
}

/// `mu_p = f_max^{-(2-p)/alpha}`.
pub fn blowup_scale(f_max: f64, p: f64, alpha: f64) -> f64 {
    f_max.powf(-(2.0 - p) / alpha)
}

/// Rescales a converged maximizer around its largest node (lowest index on ties)
/// and compares it with the model extremal `H` on the nodes within `radius_factor * mu_p`.
///
/// Local coordinates are `center^{-1} u` on cylinder grids and the inverse Cayley
/// image after rotating the center to the north pole on sphere grids.
pub fn blowup_diagnostic(
    result: &SubcriticalResult,
    grid: &QuadratureGrid,
    params: &Params,
    radius_factor: f64,
) -> Result<BlowupReport> {
    if !result.converged {
        return Err(Error::Solver(
            "blow-up diagnostic needs a converged result".into(),
        ));
    }
    check_len(grid.len(), result.f.len())?;
    if !(radius_factor > 0.0) {
        return Err(domain(format!(
            "radius factor must be > 0 (got {radius_factor})"
        )));
    }
    let f = result.f.values();
    let mut center = 0;
    for (i, &v) in f.iter().enumerate() {
        if v > f[center] {
            center = i;
        }
    }
    let f_max = f[center];
    if !(f_max > 0.0) {
        return Err(Error::Solver("maximizer vanishes identically".into()));
    }
    let mu = blowup_scale(f_max, result.p, params.alpha);
    let ball = radius_factor * mu;
    let inv_mu = 1.0 / mu;

    let mut profile = Vec::new();
    match &grid.nodes {
        Nodes::Sphere(nodes) => {
            let align = PoleAlignment::new(nodes[center].coords());
            for (i, node) in nodes.iter().enumerate() {
                let dist = sphere_dist_sqr_unchecked(nodes[center].coords(), node.coords()).sqrt();
                if dist > ball {
                    continue;
                }
                let rotated = SpherePoint::new(align.apply(node.coords()))?;
                let Ok(u) = cayley_inv(&rotated) else {
                    continue;
                };
                let model = extremal_h_parts(
                    u.z_norm_sqr() * inv_mu * inv_mu,
                    u.t * inv_mu * inv_mu,
                    params,
                );
                profile.push(ProfileSample {
                    node: i,
                    distance: dist,
                    value: f[i] / f_max,
                    model,
                });
            }
        }
        Nodes::Cylinder(nodes) => {
            let c_inv = group_inv(&nodes[center]);
            for (i, node) in nodes.iter().enumerate() {
                let dist = hdist_unchecked(&node.z, node.t, &nodes[center].z, nodes[center].t);
                if dist > ball {
                    continue;
                }
                let u = group_mul(&c_inv, node)?;
                let model = extremal_h_parts(
                    u.z_norm_sqr() * inv_mu * inv_mu,
                    u.t * inv_mu * inv_mu,
                    params,
                );
                profile.push(ProfileSample {
                    node: i,
                    distance: dist,
                    value: f[i] / f_max,
                    model,
                });
            }
        }
        Nodes::Discrete(_) => {
            return Err(Error::Grid(
                "blow-up diagnostic needs a sphere or cylinder grid".into(),
            ));
        }
    }
    let profile_deviation = profile
        .iter()
        .map(|s| (s.value - s.model).abs())
        .fold(0.0, f64::max);
    Ok(BlowupReport {
        mu_p: mu,
        center_index: center,
        profile,
        profile_deviation,
    })
}
