//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::process::Command;
use std::time::Instant;

use crhls::discretization::{
    assemble_kernel, assemble_orbit_kernel, read_kernel_csv, read_weights, sphere_grid,
    CylinderResolution, KernelMatrix, KernelSpec, QuadratureGrid, Spacing, SphereResolution,
};
use crhls::experiments::{
    conformal_covariance_check, default_mass_resolution, mass_perturbation_experiment,
    truncated_extremal_norm,
};
use crhls::functional::{
    lp_norm, rayleigh_quotient, tail_integral_i1, young_bound, GridFunction, TailResolution,
};
use crhls::solver::{continuation, default_schedule, solve_subcritical, Init, SolverOptions};
use crhls::{cli, Params};
use rand::RngExt;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params() -> Params {
    Params::new(1, 2.0).unwrap()
}

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn sharp_constant() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_crhls"))
        .args(["constants", "--n", "1", "--alpha", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    if !out.status.success() {
        return Err(format!("exit status {}", out.status));
    }
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let r = &doc["result"];
    let d = r["D_H"].as_f64().unwrap_or(f64::NAN);
    let rel = (d - 8.0).abs() / 8.0;
    let q_ok = (r["q_alpha"].as_f64().unwrap_or(0.0) - 4.0 / 3.0).abs() < 1e-15;
    let p_ok = r["p_alpha"].as_f64() == Some(4.0);
    check(
        rel <= 1e-12 && q_ok && p_ok && elapsed < 1.0,
        format!(
            "D_H = {d} (rel err {rel:.1e}), q_alpha/p_alpha ok = {}, {elapsed:.3} s",
            q_ok && p_ok
        ),
    )
}

fn sphere_problem() -> (QuadratureGrid, KernelMatrix) {
    let grid = sphere_grid(SphereResolution {
        theta: 32,
        phi1: 128,
        phi2: 128,
    })
    .unwrap();
    assemble_orbit_kernel(&grid, &KernelSpec::PureSingular, &params()).unwrap()
}

fn sphere_sharpness(grid: &QuadratureGrid, kernel: &KernelMatrix) -> (Outcome, f64) {
    let p = params();
    let ones = GridFunction::constant(grid.len(), 1.0);
    let q = rayleigh_quotient(kernel, grid, &ones, p.q_alpha).unwrap();
    (
        check(
            (7.84..=8.00).contains(&q),
            format!("quotient(f = 1) = {q:.6} on 32 x 128 x 128"),
        ),
        q,
    )
}

fn tail_scaling() -> Outcome {
    let p = params();
    let ratios = [8.0, 16.0, 32.0, 64.0];
    let eps = 0.02;
    let values: Vec<f64> = ratios
        .iter()
        .map(|r| tail_integral_i1(eps, r * eps, &p, TailResolution::default()).unwrap())
        .collect();
    let slope = cli::log_log_slope(&ratios, &values);
    check(
        (slope + 4.0).abs() <= 0.4,
        format!("slope = {slope:.4} (target -4 +/- 10%)"),
    )
}

fn eps_invariance() -> Outcome {
    let p = params();
    let norms: Vec<f64> = [0.05, 0.1, 0.2]
        .iter()
        .map(|&eps| {
            let res = CylinderResolution {
                radial: 20,
                simplex: 2,
                angular: 32,
                vertical: 160,
                spacing: Spacing::Graded { scale: eps },
            };
            truncated_extremal_norm(eps, 50.0 * eps, res, &p).unwrap()
        })
        .collect();
    let max = norms.iter().cloned().fold(f64::MIN, f64::max);
    let min = norms.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / max;
    check(
        spread <= 0.01,
        format!("norms = {norms:.6?}, spread {:.3}%", 100.0 * spread),
    )
}

fn oracle_equivalence() -> Outcome {
    let opts = SolverOptions {
        tol: 1e-12,
        max_iter: 100_000,
    };
    let mut rng = common::rng(20_251_015);
    let mut worst_d: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    let mut failures = 0;
    for case in 0..25 {
        let n = 2 + case % 3;
        let (k, g) = common::random_problem(&mut rng, n);
        let p = rng.random_range(1.2..1.9);
        let r = solve_subcritical(&k, &g, p, opts, Init::Uniform).unwrap();
        let (d, f) = common::brute_force(k.entries(), &g.weights, p);
        let dd = (r.d_estimate - d).abs() / d.max(1.0);
        let df =
            r.f.values()
                .iter()
                .zip(&f)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        worst_d = worst_d.max(dd);
        worst_f = worst_f.max(df);
        if !r.converged || dd > 1e-3 || df > 1e-2 {
            failures += 1;
        }
    }
    let (k, _, _) = read_kernel_csv(&fixture("two_node_kernel.csv")).unwrap();
    let g =
        QuadratureGrid::discrete(read_weights(&fixture("two_node_weights.csv")).unwrap()).unwrap();
    let toy = solve_subcritical(&k, &g, 1.5, opts, Init::Uniform).unwrap();
    let toy_err = (toy.d_estimate - 2f64.powf(-1.0 / 3.0)).abs();
    check(
        failures == 0 && toy_err <= 1e-6,
        format!(
            "{failures}/25 mismatches, max dD {worst_d:.1e}, max df {worst_f:.1e}; fixture D = {:.8} (err {toy_err:.1e})",
            toy.d_estimate
        ),
    )
}

fn continuation_limit(grid: &QuadratureGrid, kernel: &KernelMatrix, reference: f64) -> Outcome {
    let stages = continuation(
        kernel,
        grid,
        &default_schedule(&params()),
        SolverOptions::default(),
    )
    .unwrap();
    let last = stages.last().unwrap();
    let rel = (last.d_estimate - reference).abs() / reference;
    check(
        last.converged && rel <= 0.03,
        format!(
            "D(p = {:.4}) = {:.5}, {:.2}% from {reference:.5}, {} stages converged = {}",
            last.p,
            last.d_estimate,
            100.0 * rel,
            stages.len(),
            stages.iter().all(|s| s.converged)
        ),
    )
}

fn positive_mass() -> Outcome {
    let mut deltas = Vec::new();
    for a0 in [0.5, 1.0, 2.0] {
        let rec = mass_perturbation_experiment(
            a0,
            0.0,
            2.0,
            default_mass_resolution(),
            SolverOptions::default(),
        )
        .unwrap();
        deltas.push(rec.delta);
    }
    let positive = deltas.iter().all(|d| *d > 0.0);
    let monotone = deltas.windows(2).all(|w| w[1] >= w[0]);
    check(
        positive && monotone,
        format!("delta(A0 = 0.5, 1, 2) = {deltas:.4?}"),
    )
}

fn conformal_covariance() -> Outcome {
    let p = params();
    let mut rng = common::rng(7);
    let grid = cli::random_sphere_grid(1, 50, &mut rng).unwrap();
    let kernel = assemble_kernel(&grid, &KernelSpec::PureSingular, &p).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let phi = (0..50).map(|_| rng.random_range(0.5..2.0)).collect();
        let u = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = conformal_covariance_check(
            &kernel,
            &grid,
            &GridFunction::new(phi).unwrap(),
            &GridFunction::new(u).unwrap(),
            &p,
        )
        .unwrap();
        worst = worst.max(r);
    }
    check(
        worst <= 1e-10,
        format!("max residual {worst:.2e} over 100 pairs, 50 nodes"),
    )
}

fn young() -> Outcome {
    let mut rng = common::rng(99);
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..12);
        let (k, g) = common::random_problem(&mut rng, n);
        let (p, r) = loop {
            let p: f64 = rng.random_range(1.0..3.0);
            let r: f64 = rng.random_range(1.0..3.0);
            if 1.0 / p + 1.0 / r > 1.0 {
                break (p, r);
            }
        };
        let q = 1.0 / (1.0 / p + 1.0 / r - 1.0);
        let f = GridFunction::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let af = GridFunction::new(k.apply(f.values(), &g.weights)).unwrap();
        let lhs = lp_norm(&af, &g, q).unwrap();
        let rhs = young_bound(&k, &g, r).unwrap() * lp_norm(&f, &g, p).unwrap();
        tightest = tightest.max(lhs / rhs);
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    check(
        violations == 0,
        format!("{violations} violations in 100 cases, max ratio {tightest:.4}"),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 sharp constant", sharp_constant()));
    let (grid, kernel) = sphere_problem();
    let (sharp, reference) = sphere_sharpness(&grid, &kernel);
    results.push(("2 sphere sharpness", sharp));
    results.push(("3 tail scaling law", tail_scaling()));
    results.push(("4 eps-invariance", eps_invariance()));
    results.push(("5 subcritical oracle", oracle_equivalence()));
    results.push((
        "6 continuation limit",
        continuation_limit(&grid, &kernel, reference),
    ));
    results.push(("7 positive mass", positive_mass()));
    results.push(("8 conformal covariance", conformal_covariance()));
    results.push(("9 Young bound", young()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {}/{} passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
