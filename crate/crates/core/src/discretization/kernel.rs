//! Dense kernel matrices for the pure singular kernel `rho^{alpha - Q}` and the
//! Green-kernel model `(rho^{-2n} + A(xi) + c_w rho)^{(Q - alpha)/(Q - 2)}`.
//!
//! Diagonal rule: `K_ii = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Nodes, QuadratureGrid};
use crate::error::{check_len, domain, Error, Result};
use crate::heisenberg::hdist_sqr_unchecked;
use crate::numerics::Params;
use crate::sphere::sphere_dist_sqr_unchecked;
use crate::sum::neumaier;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KernelSpec {
    PureSingular,
    /// `mass` holds `A(xi_i)` per node; `remainder` is the coefficient `c_w`.
    GreenModel {
        mass: Vec<f64>,
        remainder: f64,
    },
    /// Entries supplied directly (CSV or FFI).
    Explicit,
}

impl KernelSpec {
    pub fn green_constant_mass(n_nodes: usize, a0: f64, remainder: f64) -> Self {
        KernelSpec::GreenModel {
            mass: vec![a0; n_nodes],
            remainder,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::PureSingular => "pure_singular",
            KernelSpec::GreenModel { .. } => "green_model",
            KernelSpec::Explicit => "explicit",
        }
    }
}

/// Dense row-major `N x N` kernel. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: Vec<f64>,
    dim: usize,
    symmetric: bool,
    pub spec: KernelSpec,
    /// `None` for explicit kernels.
    pub params: Option<Params>,
}

impl KernelMatrix {
    /// Wraps user-supplied entries. Entries must be finite and nonnegative.
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Grid("kernel dimension must be >= 1".into()));
        }
        check_len(dim * dim, entries.len())?;
        if let Some((k, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::Grid(format!(
                "kernel entries must be finite and >= 0 (entry ({}, {}) = {v})",
                k / dim,
                k % dim
            )));
        }
        Ok(Self::build(dim, entries, KernelSpec::Explicit, None))
    }

    fn build(dim: usize, entries: Vec<f64>, spec: KernelSpec, params: Option<Params>) -> Self {
        let symmetric =
            (0..dim).all(|i| (0..i).all(|j| entries[i * dim + j] == entries[j * dim + i]));
        Self {
            entries,
            dim,
            symmetric,
            spec,
            params,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact entrywise symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// `lambda K`, keeping spec and params.
    pub fn scaled(&self, lambda: f64) -> Self {
        let entries = self.entries.iter().map(|v| v * lambda).collect();
        Self::build(self.dim, entries, self.spec.clone(), self.params)
    }

    /// `(K (f w))_i = sum_j K_ij f_j w_j`.
    pub fn apply(&self, f: &[f64], weights: &[f64]) -> Vec<f64> {
        let fw: Vec<f64> = f.iter().zip(weights).map(|(a, b)| a * b).collect();
        self.entries
            .par_chunks(self.dim)
            .map(|row| neumaier(row.iter().zip(&fw).map(|(k, v)| k * v)))
            .collect()
    }

    /// `(K^T (f w))_j = sum_i K_ij f_i w_i`.
    pub fn apply_transpose(&self, f: &[f64], weights: &[f64]) -> Vec<f64> {
        if self.symmetric {
            return self.apply(f, weights);
        }
        let fw: Vec<f64> = f.iter().zip(weights).map(|(a, b)| a * b).collect();
        let n = self.dim;
        (0..n)
            .into_par_iter()
            .map(|j| neumaier((0..n).map(|i| self.entries[i * n + j] * fw[i])))
            .collect()
    }

    /// `sum_j K_ij w_j` for every row.
    pub fn row_sums(&self, weights: &[f64]) -> Vec<f64> {
        self.apply(&vec![1.0; self.dim], weights)
    }
}

/// Squared distance between nodes `i` and `j`; `rho^2` in both geometries.
fn dist_sqr(nodes: &Nodes, i: usize, j: usize) -> f64 {
    match nodes {
        Nodes::Sphere(v) => sphere_dist_sqr_unchecked(v[i].coords(), v[j].coords()),
        Nodes::Cylinder(v) => hdist_sqr_unchecked(&v[i].z, v[i].t, &v[j].z, v[j].t),
        Nodes::Discrete(_) => unreachable!("discrete grids have no geometry"),
    }
}

struct Evaluator<'a> {
    spec: &'a KernelSpec,
    n: i32,
    singular: f64,
    green: f64,
}

impl Evaluator<'_> {
    fn new<'a>(spec: &'a KernelSpec, params: &Params) -> Evaluator<'a> {
        Evaluator {
            spec,
            n: params.n as i32,
            singular: 0.5 * params.singular_exponent(),
            green: params.green_exponent(),
        }
    }

    /// Kernel value at `rho^2 = d2` with source node `i`.
    #[inline]
    fn eval(&self, i: usize, j: usize, d2: f64) -> Result<f64> {
        if d2 <= 0.0 {
            return Err(Error::Grid(format!("nodes {i} and {j} coincide")));
        }
        match self.spec {
            KernelSpec::PureSingular => Ok(d2.powf(self.singular)),
            KernelSpec::GreenModel { mass, remainder } => {
                let base = d2.powi(-self.n) + mass[i] + remainder * d2.sqrt();
                if !(base > 0.0) {
                    return Err(Error::NonpositiveBase {
                        row: i,
                        col: j,
                        base,
                    });
                }
                Ok(base.powf(self.green))
            }
            KernelSpec::Explicit => unreachable!(),
        }
    }
}

fn validate(grid: &QuadratureGrid, spec: &KernelSpec, params: &Params) -> Result<()> {
    if matches!(grid.nodes, Nodes::Discrete(_)) {
        return Err(Error::Grid(
            "kernel assembly needs a sphere or cylinder grid".into(),
        ));
    }
    if grid.n != params.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            got: params.n,
        });
    }
    match spec {
        KernelSpec::PureSingular => Ok(()),
        KernelSpec::GreenModel { mass, remainder } => {
            check_len(grid.len(), mass.len())?;
            if mass.iter().chain([remainder]).any(|v| !v.is_finite()) {
                return Err(Error::Grid(
                    "green model mass and remainder must be finite".into(),
                ));
            }
            if *remainder < 0.0 {
                return Err(domain(format!(
                    "remainder coefficient c_w must be >= 0 (got {remainder})"
                )));
            }
            Ok(())
        }
        KernelSpec::Explicit => Err(Error::Grid(
            "explicit kernels are built with KernelMatrix::from_entries".into(),
        )),
    }
}

/// Dense kernel on `grid`, rows assembled in parallel.
pub fn assemble_kernel(
    grid: &QuadratureGrid,
    spec: &KernelSpec,
    params: &Params,
) -> Result<KernelMatrix> {
    validate(grid, spec, params)?;
    let n = grid.len();
    let ev = Evaluator::new(spec, params);
    let mut entries = vec![0.0; n * n];
    let status: Vec<Result<()>> = entries
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                if j != i {
                    *slot = ev.eval(i, j, dist_sqr(&grid.nodes, i, j))?;
                }
            }
            Ok(())
        })
        .collect();
    status.into_iter().collect::<Result<()>>()?;
    Ok(KernelMatrix::build(n, entries, spec.clone(), Some(*params)))
}

/// Kernel reduced to torus orbits of `grid`, together with the orbit grid.
///
/// `K~_ab = (sum_{j in orbit b} K(rep_a, j) w_j) / W_b`, where `rep_a` is the
/// first node of orbit `a` and `W_b` the orbit weight. For orbit-constant
/// functions the bilinear form and all `L^p` norms agree with the full grid.
/// Green-model masses must be constant on orbits.
pub fn assemble_orbit_kernel(
    grid: &QuadratureGrid,
    spec: &KernelSpec,
    params: &Params,
) -> Result<(QuadratureGrid, KernelMatrix)> {
    validate(grid, spec, params)?;
    let m = grid.orbit_size;
    let reduced_spec = match spec {
        KernelSpec::GreenModel { mass, remainder } => {
            if let Some(k) = mass.chunks(m).position(|c| c.iter().any(|&a| a != c[0])) {
                return Err(Error::Grid(format!(
                    "green model mass varies within orbit {k}"
                )));
            }
            KernelSpec::GreenModel {
                mass: mass.iter().step_by(m).copied().collect(),
                remainder: *remainder,
            }
        }
        other => other.clone(),
    };
    let orbit = grid.orbit_grid();
    let nb = orbit.len();
    let ev = Evaluator::new(spec, params);
    let mut entries = vec![0.0; nb * nb];
    let status: Vec<Result<()>> = entries
        .par_chunks_mut(nb)
        .enumerate()
        .map(|(a, row)| {
            let rep = a * m;
            for (b, slot) in row.iter_mut().enumerate() {
                let mut terms = Vec::with_capacity(m);
                for j in b * m..(b + 1) * m {
                    if j != rep {
                        terms.push(
                            ev.eval(rep, j, dist_sqr(&grid.nodes, rep, j))? * grid.weights[j],
                        );
                    }
                }
                *slot = neumaier(terms) / orbit.weights[b];
            }
            Ok(())
        })
        .collect();
    status.into_iter().collect::<Result<()>>()?;
    let kernel = KernelMatrix::build(nb, entries, reduced_spec, Some(*params));
    Ok((orbit, kernel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::{
        cylinder_grid, sphere_grid, CylinderResolution, SphereResolution,
    };
    use crate::heisenberg::HPoint;
    use crate::sphere::SpherePoint;
    use num_complex::Complex64;

    fn p12() -> Params {
        Params::new(1, 2.0).unwrap()
    }

    #[test]
    fn two_node_toy_has_unit_entries() {
        // Sphere distance 1: |1 - e^{-i s}| = 2 sin(s/2) = 1/2.
        let a = SpherePoint::north(1);
        let eta = Complex64::from_polar(1.0, 2.0 * 0.25f64.asin());
        let b = SpherePoint::new(vec![Complex64::new(0.0, 0.0), eta]).unwrap();
        let grid = QuadratureGrid {
            nodes: Nodes::Sphere(vec![a, b]),
            weights: vec![1.0, 1.0],
            kind: crate::discretization::GridKind::Sphere,
            n: 1,
            resolution: vec![2],
            orbit_size: 1,
        };
        let k = assemble_kernel(&grid, &KernelSpec::PureSingular, &p12()).unwrap();
        assert_eq!(k.get(0, 0), 0.0);
        assert!((k.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((k.get(1, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn green_without_mass_matches_pure() {
        let g = sphere_grid(SphereResolution::cubic(4)).unwrap();
        for alpha in [0.5, 1.0, 2.0, 3.5] {
            let p = Params::new(1, alpha).unwrap();
            let pure = assemble_kernel(&g, &KernelSpec::PureSingular, &p).unwrap();
            let green =
                assemble_kernel(&g, &KernelSpec::green_constant_mass(g.len(), 0.0, 0.0), &p)
                    .unwrap();
            for (a, b) in pure.entries().iter().zip(green.entries()) {
                assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
            assert!(pure.is_symmetric());
        }
    }

    #[test]
    fn mass_dominates_pure() {
        let g = sphere_grid(SphereResolution::cubic(4)).unwrap();
        let p = Params::new(1, 1.0).unwrap();
        let pure = assemble_kernel(&g, &KernelSpec::PureSingular, &p).unwrap();
        let green =
            assemble_kernel(&g, &KernelSpec::green_constant_mass(g.len(), 0.7, 0.0), &p).unwrap();
        assert!(pure
            .entries()
            .iter()
            .zip(green.entries())
            .all(|(a, b)| b >= a));
    }

    #[test]
    fn entries_tend_to_one_as_alpha_approaches_q() {
        let g = sphere_grid(SphereResolution::cubic(4)).unwrap();
        let p = Params::new(1, 4.0 - 1e-9).unwrap();
        let k = assemble_kernel(&g, &KernelSpec::PureSingular, &p).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i != j {
                    assert!((k.get(i, j) - 1.0).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn nonpositive_base_reports_pair() {
        let g = sphere_grid(SphereResolution::cubic(4)).unwrap();
        let spec = KernelSpec::green_constant_mass(g.len(), -10.0, 0.0);
        match assemble_kernel(&g, &spec, &Params::new(1, 1.0).unwrap()) {
            Err(Error::NonpositiveBase { row, col, base }) => {
                assert!(row != col && base <= 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coincident_nodes_rejected() {
        let u = HPoint::origin(1);
        let grid = QuadratureGrid {
            nodes: Nodes::Cylinder(vec![u.clone(), u]),
            weights: vec![1.0, 1.0],
            kind: crate::discretization::GridKind::Cylinder,
            n: 1,
            resolution: vec![2],
            orbit_size: 1,
        };
        assert!(assemble_kernel(&grid, &KernelSpec::PureSingular, &p12()).is_err());
    }

    #[test]
    fn orbit_kernel_reproduces_bilinear_form() {
        let g = cylinder_grid(1, 1.0, CylinderResolution::uniform(3, 6, 4)).unwrap();
        let p = Params::new(1, 1.5).unwrap();
        let full = assemble_kernel(&g, &KernelSpec::PureSingular, &p).unwrap();
        let (og, red) = assemble_orbit_kernel(&g, &KernelSpec::PureSingular, &p).unwrap();
        let f_orbit: Vec<f64> = (0..og.len()).map(|a| 1.0 + 0.3 * a as f64).collect();
        let f = g.expand_orbit_values(&f_orbit);
        let kf = full.apply(&f, &g.weights);
        let b_full = neumaier(
            kf.iter()
                .zip(&f)
                .zip(&g.weights)
                .map(|((k, v), w)| k * v * w),
        );
        let kr = red.apply(&f_orbit, &og.weights);
        let b_red = neumaier(
            kr.iter()
                .zip(&f_orbit)
                .zip(&og.weights)
                .map(|((k, v), w)| k * v * w),
        );
        assert!(
            ((b_full - b_red) / b_full).abs() < 1e-12,
            "{b_full} vs {b_red}"
        );
        for a in 0..og.len() {
            for b in 0..a {
                let (x, y) = (red.get(a, b), red.get(b, a));
                assert!((x - y).abs() <= 1e-12 * x.abs());
            }
        }
    }

    #[test]
    fn orbit_kernel_requires_orbit_constant_mass() {
        let g = sphere_grid(SphereResolution::cubic(4)).unwrap();
        let mut mass = vec![0.0; g.len()];
        mass[1] = 1.0;
        let spec = KernelSpec::GreenModel {
            mass,
            remainder: 0.0,
        };
        assert!(assemble_orbit_kernel(&g, &spec, &p12()).is_err());
    }

    #[test]
    fn explicit_entries_validated() {
        assert!(KernelMatrix::from_entries(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(KernelMatrix::from_entries(2, vec![0.0, -1.0, 1.0, 0.0]).is_err());
        assert!(KernelMatrix::from_entries(2, vec![0.0, 1.0, 1.0]).is_err());
        let k = KernelMatrix::from_entries(2, vec![0.0, 2.0, 1.0, 0.0]).unwrap();
        assert!(!k.is_symmetric());
        assert_eq!(k.apply_transpose(&[1.0, 1.0], &[1.0, 1.0]), vec![1.0, 2.0]);
        assert_eq!(k.apply(&[1.0, 1.0], &[1.0, 1.0]), vec![2.0, 1.0]);
    }
}
