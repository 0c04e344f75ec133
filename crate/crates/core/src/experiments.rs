//! Experiment drivers: the truncated-extremal lower bound, the mass
//! perturbation comparison, the discrete conformal covariance identity and the
//! integral curvature-equation residual.

use serde::{Deserialize, Serialize};

use crate::discretization::{
    assemble_orbit_kernel, cylinder_grid, sphere_grid, CylinderResolution, KernelMatrix,
    KernelSpec, QuadratureGrid, Spacing, SphereResolution,
};
use crate::error::{check_len, domain, Result};
use crate::functional::{lp_norm, rayleigh_quotient, sample_extremal_family, GridFunction};
use crate::numerics::Params;
use crate::solver::{continuation, default_schedule, SolverOptions, SubcriticalResult};

/// Graded cylinder rule resolving `f_eps`: 20 radial, 32 angular and 160 vertical nodes.
pub fn default_lower_bound_resolution(eps: f64) -> CylinderResolution {
    CylinderResolution {
        radial: 20,
        simplex: 2,
        angular: 32,
        vertical: 160,
        spacing: Spacing::Graded { scale: eps },
    }
}

/// Sphere rule used by the mass perturbation experiment.
pub fn default_mass_resolution() -> SphereResolution {
    SphereResolution {
        theta: 16,
        phi1: 64,
        phi2: 64,
    }
}

fn check_eps_radius(eps: f64, radius: f64) -> Result<()> {
    if !(eps > 0.0) || !(radius > eps) || !radius.is_finite() {
        return Err(domain(format!(
            "need 0 < eps < R (got eps = {eps}, R = {radius})"
        )));
    }
    Ok(())
}

/// `||f_eps||_{q_alpha}` over `Sigma_R`.
pub fn truncated_extremal_norm(
    eps: f64,
    radius: f64,
    res: CylinderResolution,
    params: &Params,
) -> Result<f64> {
    check_eps_radius(eps, radius)?;
    let grid = cylinder_grid(params.n, radius, res)?.orbit_grid();
    let f = sample_extremal_family(&grid, eps, params)?;
    lp_norm(&f, &grid, params.q_alpha)
}

/// Critical Rayleigh quotient of `f_eps 1_{Sigma_R}` against `rho^{alpha - Q}` on a
/// cylinder grid. Tends to `D_H` from below as `R / eps` grows and the mesh refines.
pub fn lower_bound_experiment(
    eps: f64,
    radius: f64,
    res: CylinderResolution,
    params: &Params,
) -> Result<f64> {
    check_eps_radius(eps, radius)?;
    let grid = cylinder_grid(params.n, radius, res)?;
    let (orbit, kernel) = assemble_orbit_kernel(&grid, &KernelSpec::PureSingular, params)?;
    let f = sample_extremal_family(&orbit, eps, params)?;
    rayleigh_quotient(&kernel, &orbit, &f, params.q_alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassComparison {
    pub a0: f64,
    pub c_w: f64,
    pub alpha: f64,
    pub quotient_mass: f64,
    pub quotient_pure: f64,
    pub delta: f64,
    pub stages_mass: Vec<SubcriticalResult>,
    pub stages_pure: Vec<SubcriticalResult>,
}

/// Continuation toward `q_alpha` on `S^3` for the Green model with constant mass `A0`
/// and for the pure singular kernel; `delta = quotient_mass - quotient_pure`.
pub fn mass_perturbation_experiment(
    a0: f64,
    c_w: f64,
    alpha: f64,
    res: SphereResolution,
    opts: SolverOptions,
) -> Result<MassComparison> {
    if !(a0 >= 0.0) || !a0.is_finite() {
        return Err(domain(format!("A0 must be >= 0 (got {a0})")));
    }
    let params = Params::new(1, alpha)?;
    let grid = sphere_grid(res)?;
    let schedule = default_schedule(&params);
    let run = |spec: &KernelSpec| -> Result<Vec<SubcriticalResult>> {
        let (orbit, kernel) = assemble_orbit_kernel(&grid, spec, &params)?;
        continuation(&kernel, &orbit, &schedule, opts)
    };
    let stages_pure = run(&KernelSpec::PureSingular)?;
    let stages_mass = run(&KernelSpec::green_constant_mass(grid.len(), a0, c_w))?;
    let quotient_mass = stages_mass.last().map_or(f64::NAN, |r| r.d_estimate);
    let quotient_pure = stages_pure.last().map_or(f64::NAN, |r| r.d_estimate);
    Ok(MassComparison {
        a0,
        c_w,
        alpha,
        quotient_mass,
        quotient_pure,
        delta: quotient_mass - quotient_pure,
        stages_mass,
        stages_pure,
    })
}

fn check_positive(phi: &GridFunction) -> Result<()> {
    if let Some(v) = phi.values().iter().find(|v| !(**v > 0.0)) {
        return Err(domain(format!("phi must be strictly positive (found {v})")));
    }
    Ok(())
}

fn sup_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Relative sup-norm defect of the covariance identity
/// `I~(u) = phi^{-(Q-a)/(Q-2)} I(phi^{(Q+a)/(Q-2)} u)`.
///
/// The transformed kernel is `(phi_i^{-1} phi_j^{-1} G_ij)^{(Q-a)/(Q-2)}` with
/// `G = K^{(Q-2)/(Q-a)}`, and the transformed weights are `phi^{2Q/(Q-2)} w`.
pub fn conformal_covariance_check(
    kernel: &KernelMatrix,
    grid: &QuadratureGrid,
    phi: &GridFunction,
    u: &GridFunction,
    params: &Params,
) -> Result<f64> {
    check_len(kernel.dim(), grid.len())?;
    check_len(grid.len(), phi.len())?;
    check_len(grid.len(), u.len())?;
    check_positive(phi)?;
    let q = params.q();
    let a = params.alpha;
    let gamma = params.green_exponent();
    let phi = phi.values();
    let u = u.values();
    let n = grid.len();

    let phi_gamma: Vec<f64> = phi.iter().map(|v| v.powf(-gamma)).collect();
    let new_w: Vec<f64> = phi
        .iter()
        .zip(&grid.weights)
        .map(|(v, w)| v.powf(2.0 * q / (q - 2.0)) * w)
        .collect();
    let mut transformed = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            transformed.push(phi_gamma[i] * phi_gamma[j] * kernel.get(i, j));
        }
    }
    let transformed = KernelMatrix::from_entries(n, transformed)?;
    let lhs = transformed.apply(u, &new_w);

    let lifted: Vec<f64> = phi
        .iter()
        .zip(u)
        .map(|(v, x)| v.powf((q + a) / (q - 2.0)) * x)
        .collect();
    let rhs: Vec<f64> = kernel
        .apply(&lifted, &grid.weights)
        .into_iter()
        .zip(&phi_gamma)
        .map(|(k, p)| p * k)
        .collect();
    let scale = sup_abs(rhs.iter().copied());
    let defect = sup_abs(lhs.iter().zip(&rhs).map(|(l, r)| l - r));
    Ok(if scale > 0.0 { defect / scale } else { defect })
}

/// Defect of `phi^{(Q+a)/(Q-a)} = K (phi w)` after the constant rescaling
/// `phi -> c phi` that matches weighted means, relative to `sup |K (c phi w)|`.
pub fn curvature_equation_residual(
    kernel: &KernelMatrix,
    grid: &QuadratureGrid,
    phi: &GridFunction,
    params: &Params,
) -> Result<f64> {
    check_len(kernel.dim(), grid.len())?;
    check_len(grid.len(), phi.len())?;
    check_positive(phi)?;
    let beta = (params.q() + params.alpha) / (params.q() - params.alpha);
    let phi = phi.values();
    let w = &grid.weights;
    let k_phi = kernel.apply(phi, w);
    let powered: Vec<f64> = phi.iter().map(|v| v.powf(beta)).collect();
    let mean = |v: &[f64]| crate::functional::weighted_dot(v, &vec![1.0; v.len()], w);
    let c = (mean(&k_phi) / mean(&powered)).powf(1.0 / (beta - 1.0));
    let lhs: Vec<f64> = powered.iter().map(|v| c.powf(beta) * v).collect();
    let rhs: Vec<f64> = k_phi.iter().map(|v| c * v).collect();
    let scale = sup_abs(rhs.iter().copied());
    Ok(sup_abs(lhs.iter().zip(&rhs).map(|(l, r)| l - r)) / scale)
}
