//! Command implementations. Each returns a JSON result plus an optional CSV table.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{PhiMode, RunConfig};
use crate::discretization::{
    assemble_kernel, assemble_orbit_kernel, read_kernel_csv, read_weights, sphere_grid, GridKind,
    KernelSpec, Nodes, QuadratureGrid,
};
use crate::error::Result;
use crate::experiments::{
    conformal_covariance_check, curvature_equation_residual, lower_bound_experiment,
    mass_perturbation_experiment, truncated_extremal_norm,
};
use crate::functional::{tail_integral_i1, GridFunction, TailResolution};
use crate::numerics::sharp_constant_dh;
use crate::solver::{blowup_diagnostic, continuation, default_schedule, solve_subcritical, Init};
use crate::sphere::SpherePoint;

/// CSV hand-off: a header row and data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    /// False when some solver stage did not converge.
    pub converged: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub(crate) fn run_command(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "constants" => constants(cfg),
        "verify-hls" => verify_hls(cfg),
        "tail-integral" => tail_integral(cfg),
        "lower-bound" => lower_bound(cfg),
        "extremal-sub" => extremal_sub(cfg),
        "continuation" => continuation_cmd(cfg),
        "mass-experiment" => mass_experiment(cfg),
        "covariance-check" => covariance_check(cfg),
        "curvature-residual" => curvature_residual(cfg),
        other => unreachable!("validated command {other}"),
    }
}

fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let d_h = sharp_constant_dh(&p);
    let mut table = Table::new(&[
        "experiment",
        "n",
        "alpha",
        "D_H",
        "p_alpha",
        "q_alpha",
        "b_n",
    ]);
    table.push(vec![
        "constants".into(),
        p.n.to_string(),
        num(p.alpha),
        num(d_h),
        num(p.p_alpha),
        num(p.q_alpha),
        num(p.b_n),
    ]);
    Ok(Outcome {
        result: json!({
            "n": p.n,
            "Q": p.homogeneous_dim,
            "alpha": p.alpha,
            "D_H": d_h,
            "p_alpha": p.p_alpha,
            "q_alpha": p.q_alpha,
            "b_n": p.b_n,
        }),
        table: Some(table),
        converged: true,
    })
}

fn verify_hls(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let d_h = sharp_constant_dh(&p);
    let mut table = Table::new(&["experiment", "eps", "R", "norm_q"]);
    let mut norms = Vec::new();
    for &eps in &cfg.eps_list {
        let r = cfg.ratio * eps;
        let v = truncated_extremal_norm(eps, r, cfg.cylinder_resolution(eps), &p)?;
        table.push(vec!["eps_invariance".into(), num(eps), num(r), num(v)]);
        norms.push(v);
    }
    let max = norms.iter().cloned().fold(f64::MIN, f64::max);
    let min = norms.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / max;
    let eps = cfg.eps_list[0];
    let quotient = lower_bound_experiment(eps, cfg.ratio * eps, cfg.cylinder_resolution(eps), &p)?;
    Ok(Outcome {
        result: json!({
            "D_H": d_h,
            "norms": norms,
            "norm_spread": spread,
            "eps_invariance_ok": spread <= 0.01,
            "quotient": quotient,
            "upper_bound_ok": quotient <= d_h * 1.02,
        }),
        table: Some(table),
        converged: true,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

fn tail_integral(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let mut table = Table::new(&["experiment", "eps", "R", "ratio", "I1"]);
    let mut values = Vec::new();
    for &ratio in &cfg.ratios {
        let v = tail_integral_i1(cfg.eps, ratio * cfg.eps, &p, TailResolution::default())?;
        table.push(vec![
            "tail_integral".into(),
            num(cfg.eps),
            num(ratio * cfg.eps),
            num(ratio),
            num(v),
        ]);
        values.push(v);
    }
    let slope = if values.len() > 1 {
        log_log_slope(&cfg.ratios, &values)
    } else {
        f64::NAN
    };
    Ok(Outcome {
        result: json!({ "ratios": cfg.ratios, "I1": values, "slope": slope, "expected_slope": -p.q() }),
        table: Some(table),
        converged: true,
    })
}

fn lower_bound(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let r = cfg.radius_for(cfg.eps);
    let quotient = lower_bound_experiment(cfg.eps, r, cfg.cylinder_resolution(cfg.eps), &p)?;
    let d_h = sharp_constant_dh(&p);
    let mut table = Table::new(&["experiment", "eps", "R", "quotient", "D_H"]);
    table.push(vec![
        "lower_bound".into(),
        num(cfg.eps),
        num(r),
        num(quotient),
        num(d_h),
    ]);
    Ok(Outcome {
        result: json!({ "eps": cfg.eps, "R": r, "ratio": r / cfg.eps, "quotient": quotient, "D_H": d_h }),
        table: Some(table),
        converged: true,
    })
}

/// The sphere orbit grid and pure singular kernel from the configured resolution.
fn sphere_problem(
    cfg: &RunConfig,
) -> Result<(QuadratureGrid, crate::discretization::KernelMatrix)> {
    let grid = sphere_grid(cfg.sphere_resolution())?;
    assemble_orbit_kernel(&grid, &KernelSpec::PureSingular, &cfg.params()?)
}

fn function_table(f: &GridFunction) -> Table {
    let mut table = Table::new(&["node", "f"]);
    for (i, v) in f.values().iter().enumerate() {
        table.push(vec![i.to_string(), num(*v)]);
    }
    table
}

fn extremal_sub(cfg: &RunConfig) -> Result<Outcome> {
    let (grid, kernel, geometric) = match &cfg.kernel {
        Some(path) => {
            let (kernel, _, _) = read_kernel_csv(path)?;
            let weights = match &cfg.weights {
                Some(w) => read_weights(w)?,
                None => vec![1.0; kernel.dim()],
            };
            (QuadratureGrid::discrete(weights)?, kernel, false)
        }
        None => {
            let (g, k) = sphere_problem(cfg)?;
            (g, k, true)
        }
    };
    let result = solve_subcritical(&kernel, &grid, cfg.p, cfg.solver(), Init::Uniform)?;
    let blowup = if geometric && result.converged {
        Some(blowup_diagnostic(
            &result,
            &grid,
            &cfg.params()?,
            cfg.blowup_radius,
        )?)
    } else {
        None
    };
    let mut value = to_value(&result);
    if let Some(b) = blowup {
        value["blowup"] = json!({
            "mu_p": b.mu_p,
            "center_index": b.center_index,
            "profile_deviation": b.profile_deviation,
            "profile": to_value(&b.profile),
        });
    }
    Ok(Outcome {
        table: Some(function_table(&result.f)),
        converged: result.converged,
        result: value,
    })
}

fn schedule(cfg: &RunConfig) -> Result<Vec<f64>> {
    Ok(if cfg.p_schedule.is_empty() {
        default_schedule(&cfg.params()?)
    } else {
        cfg.p_schedule.clone()
    })
}

fn continuation_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (grid, kernel) = sphere_problem(cfg)?;
    let stages = continuation(&kernel, &grid, &schedule(cfg)?, cfg.solver())?;
    let mut table = Table::new(&[
        "experiment",
        "p",
        "D",
        "iterations",
        "residual",
        "converged",
    ]);
    for s in &stages {
        table.push(vec![
            "continuation".into(),
            num(s.p),
            num(s.d_estimate),
            s.iterations.to_string(),
            num(s.residual),
            s.converged.to_string(),
        ]);
    }
    let last = stages.last().expect("non-empty schedule");
    Ok(Outcome {
        result: json!({
            "stages": to_value(&stages),
            "final_p": last.p,
            "final_D": last.d_estimate,
            "D_H": sharp_constant_dh(&cfg.params()?),
        }),
        table: Some(table),
        converged: stages.iter().all(|s| s.converged),
    })
}

fn mass_experiment(cfg: &RunConfig) -> Result<Outcome> {
    let mut table = Table::new(&[
        "experiment",
        "A0",
        "c_w",
        "alpha",
        "quotient_mass",
        "quotient_pure",
        "delta",
    ]);
    let mut records = Vec::new();
    let mut converged = true;
    for &a0 in &cfg.a0 {
        let rec = mass_perturbation_experiment(
            a0,
            cfg.c_w,
            cfg.alpha,
            cfg.sphere_resolution(),
            cfg.solver(),
        )?;
        converged &= rec
            .stages_mass
            .iter()
            .chain(&rec.stages_pure)
            .all(|s| s.converged);
        table.push(vec![
            "mass_perturbation".into(),
            num(a0),
            num(cfg.c_w),
            num(cfg.alpha),
            num(rec.quotient_mass),
            num(rec.quotient_pure),
            num(rec.delta),
        ]);
        records.push(json!({
            "A0": rec.a0,
            "c_w": rec.c_w,
            "alpha": rec.alpha,
            "quotient_mass": rec.quotient_mass,
            "quotient_pure": rec.quotient_pure,
            "delta": rec.delta,
        }));
    }
    Ok(Outcome {
        result: json!({ "records": records }),
        table: Some(table),
        converged,
    })
}

/// Random points on `S^{2n+1}` with random positive weights.
pub fn random_sphere_grid(n: usize, nodes: usize, rng: &mut ChaCha8Rng) -> Result<QuadratureGrid> {
    let mut pts = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let xi = (0..=n)
            .map(|_| {
                num_complex::Complex64::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        pts.push(SpherePoint::new(xi)?);
    }
    let weights = (0..nodes).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut grid = QuadratureGrid::discrete(weights)?;
    grid.nodes = Nodes::Sphere(pts);
    grid.kind = GridKind::Sphere;
    grid.n = n;
    Ok(grid)
}

fn covariance_check(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let mode = cfg.phi_mode()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grid = random_sphere_grid(p.n, cfg.nodes, &mut rng)?;
    let kernel = assemble_kernel(&grid, &KernelSpec::PureSingular, &p)?;
    let mut table = Table::new(&["experiment", "pair", "residual"]);
    let mut worst: f64 = 0.0;
    for pair in 0..cfg.pairs {
        let phi: Vec<f64> = match mode {
            PhiMode::Random => (0..cfg.nodes).map(|_| rng.random_range(0.5..2.0)).collect(),
            PhiMode::Constant(c) => vec![c; cfg.nodes],
        };
        let u: Vec<f64> = (0..cfg.nodes)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let r = conformal_covariance_check(
            &kernel,
            &grid,
            &GridFunction::new(phi)?,
            &GridFunction::new(u)?,
            &p,
        )?;
        worst = worst.max(r);
        table.push(vec!["covariance".into(), pair.to_string(), num(r)]);
    }
    Ok(Outcome {
        result: json!({ "max_residual": worst, "pairs": cfg.pairs, "nodes": cfg.nodes, "passed": worst <= 1e-10 }),
        table: Some(table),
        converged: true,
    })
}

fn curvature_residual(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let (grid, kernel) = sphere_problem(cfg)?;
    let (phi, converged, exponent) = if cfg.phi == "maximizer" {
        let stages = continuation(&kernel, &grid, &schedule(cfg)?, cfg.solver())?;
        let last = stages.last().expect("non-empty schedule");
        let phi = last
            .f
            .values()
            .iter()
            .map(|v| v.powf(last.p - 1.0))
            .collect();
        (
            GridFunction::new(phi)?,
            stages.iter().all(|s| s.converged),
            Some(last.p),
        )
    } else {
        (GridFunction::constant(grid.len(), 1.0), true, None)
    };
    let residual = curvature_equation_residual(&kernel, &grid, &phi, &p)?;
    let mut table = Table::new(&["experiment", "phi", "residual"]);
    table.push(vec![
        "curvature_residual".into(),
        cfg.phi.clone(),
        num(residual),
    ]);
    Ok(Outcome {
        result: json!({ "phi": cfg.phi, "p": exponent, "residual": residual }),
        table: Some(table),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [8.0, 16.0, 32.0, 64.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-4.0)).collect();
        assert!((log_log_slope(&x, &y) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn random_sphere_grid_is_seeded() {
        let a = random_sphere_grid(1, 10, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = random_sphere_grid(1, 10, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }
}
