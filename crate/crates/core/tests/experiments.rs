use crhls::discretization::{assemble_orbit_kernel, sphere_grid, KernelSpec, SphereResolution};
use crhls::experiments::{
    default_lower_bound_resolution, default_mass_resolution, lower_bound_experiment,
    mass_perturbation_experiment,
};
use crhls::solver::{continuation, default_schedule, SolverOptions};
use crhls::{sharp_constant_dh, Params};

fn params() -> Params {
    Params::new(1, 2.0).unwrap()
}

#[test]
fn lower_bound_sandwich_and_hls_upper_bound() {
    let p = params();
    let eps = 0.02;
    let lower =
        lower_bound_experiment(eps, 50.0 * eps, default_lower_bound_resolution(eps), &p).unwrap();
    let grid = sphere_grid(SphereResolution {
        theta: 32,
        phi1: 128,
        phi2: 128,
    })
    .unwrap();
    let (og, k) = assemble_orbit_kernel(&grid, &KernelSpec::PureSingular, &p).unwrap();
    let stages = continuation(&k, &og, &default_schedule(&p), SolverOptions::default()).unwrap();
    let upper = stages.last().unwrap().d_estimate;
    let d_h = sharp_constant_dh(&p);
    assert!(lower <= upper, "{lower} > {upper}");
    assert!(upper <= d_h * 1.02, "{upper}");
    assert!(lower <= d_h * 1.02, "{lower}");
    assert!(lower >= 7.6, "{lower}");
}

#[test]
fn lower_bound_grows_with_truncation_radius() {
    let p = params();
    let eps = 0.05;
    let values: Vec<f64> = [1.25, 2.0, 4.0, 8.0]
        .iter()
        .map(|ratio| {
            lower_bound_experiment(eps, ratio * eps, default_lower_bound_resolution(eps), &p)
                .unwrap()
        })
        .collect();
    assert!(values.windows(2).all(|v| v[1] > v[0]), "{values:?}");
}

#[test]
fn mass_quotient_nondecreasing_in_a0() {
    let res = default_mass_resolution();
    let opts = SolverOptions::default();
    let quotients: Vec<f64> = [0.0, 0.25, 1.0, 4.0]
        .iter()
        .map(|&a0| {
            mass_perturbation_experiment(a0, 0.0, 2.0, res, opts)
                .unwrap()
                .quotient_mass
        })
        .collect();
    assert!(quotients.windows(2).all(|q| q[1] >= q[0]), "{quotients:?}");
}
