//! Product quadrature grids on `S^3` (Hopf coordinates) and on truncated
//! cylinders `Sigma_R = {|z| < R, |t| < R^2}` of `H^n`.
//!
//! Every grid built here is stored orbit-major: consecutive blocks of
//! `orbit_size` nodes form one orbit of the discrete coordinate-phase torus,
//! and the first node of each block has all phase angles equal to zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rules;
use crate::error::{Error, Result};
use crate::heisenberg::HPoint;
use crate::sphere::SpherePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Sphere,
    Cylinder,
    /// Weights only; used with user-supplied kernels.
    Discrete,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Sphere => "sphere",
            GridKind::Cylinder => "cylinder",
            GridKind::Discrete => "discrete",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nodes {
    Sphere(Vec<SpherePoint>),
    Cylinder(Vec<HPoint>),
    Discrete(usize),
}

impl Nodes {
    pub fn len(&self) -> usize {
        match self {
            Nodes::Sphere(v) => v.len(),
            Nodes::Cylinder(v) => v.len(),
            Nodes::Discrete(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nodes with positive weights approximating `dV_S` (sphere) or `dV_0` (cylinder).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Nodes,
    pub weights: Vec<f64>,
    pub kind: GridKind,
    /// CR dimension of the underlying manifold; 0 for discrete grids.
    pub n: usize,
    /// Rule orders per coordinate, in constructor order.
    pub resolution: Vec<usize>,
    /// Number of consecutive nodes forming one torus orbit (1 when unused).
    pub orbit_size: usize,
}

/// Orders of the Hopf product rule `(theta, phi_1, phi_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereResolution {
    pub theta: usize,
    pub phi1: usize,
    pub phi2: usize,
}

impl SphereResolution {
    pub fn cubic(m: usize) -> Self {
        Self {
            theta: m,
            phi1: m,
            phi2: m,
        }
    }
}

/// Node placement along the radial and vertical cylinder axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Spacing {
    /// Gauss-Legendre on each interval.
    Uniform,
    /// Gauss-Legendre after `y = s sinh(x)`, with `s = scale` radially and
    /// `s = scale^2` vertically. Concentrates nodes near the origin.
    Graded { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderResolution {
    pub radial: usize,
    /// Order per collapsed simplex coordinate; ignored for `n = 1`.
    pub simplex: usize,
    /// Phase nodes per complex coordinate.
    pub angular: usize,
    pub vertical: usize,
    pub spacing: Spacing,
}

impl CylinderResolution {
    pub fn uniform(radial: usize, angular: usize, vertical: usize) -> Self {
        Self {
            radial,
            simplex: 2,
            angular,
            vertical,
            spacing: Spacing::Uniform,
        }
    }
}

impl QuadratureGrid {
    /// A grid carrying only weights, for kernels given entrywise.
    pub fn discrete(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Grid("a grid needs at least one node".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::Grid(format!(
                "weights must be positive and finite (got {w})"
            )));
        }
        Ok(Self {
            nodes: Nodes::Discrete(weights.len()),
            resolution: vec![weights.len()],
            weights,
            kind: GridKind::Discrete,
            n: 0,
            orbit_size: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        crate::sum::neumaier(self.weights.iter().copied())
    }

    pub fn num_orbits(&self) -> usize {
        self.len() / self.orbit_size
    }

    /// Representatives of each orbit, weighted by the total orbit weight.
    ///
    /// Integrals of orbit-constant functions are the same on both grids.
    pub fn orbit_grid(&self) -> QuadratureGrid {
        let m = self.orbit_size;
        let weights: Vec<f64> = self
            .weights
            .chunks(m)
            .map(|c| crate::sum::neumaier(c.iter().copied()))
            .collect();
        let nodes = match &self.nodes {
            Nodes::Sphere(v) => Nodes::Sphere(v.iter().step_by(m).cloned().collect()),
            Nodes::Cylinder(v) => Nodes::Cylinder(v.iter().step_by(m).cloned().collect()),
            Nodes::Discrete(_) => Nodes::Discrete(weights.len()),
        };
        QuadratureGrid {
            nodes,
            weights,
            kind: self.kind,
            n: self.n,
            resolution: self.resolution.clone(),
            orbit_size: 1,
        }
    }

    /// Expands per-orbit values to per-node values.
    pub fn expand_orbit_values(&self, per_orbit: &[f64]) -> Vec<f64> {
        per_orbit
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, self.orbit_size))
            .collect()
    }
}

/// Hopf product rule on `S^3`: nodes `(cos(theta) e^{i phi_1}, sin(theta) e^{i phi_2})`,
/// Gauss-Legendre in `theta` on `(0, pi/2)`, periodic trapezoid in both phases.
///
/// Weights carry the factor `2^{2n+1} n! = 8`, so they sum to `16 pi^2`.
pub fn sphere_grid(res: SphereResolution) -> Result<QuadratureGrid> {
    let SphereResolution { theta, phi1, phi2 } = res;
    if theta < 4 || phi1 < 4 || phi2 < 4 {
        return Err(Error::Grid(format!(
            "sphere resolution components must be >= 4 (got {theta}, {phi1}, {phi2})"
        )));
    }
    let th = rules::gauss_legendre(theta, 0.0, 0.5 * PI);
    let p1 = rules::periodic(phi1);
    let p2 = rules::periodic(phi2);
    let orbit_size = phi1 * phi2;
    let mut nodes = Vec::with_capacity(theta * orbit_size);
    let mut weights = Vec::with_capacity(theta * orbit_size);
    for &(t, wt) in &th {
        let (s, c) = t.sin_cos();
        let w = 8.0 * wt * c * s * p1[0].1 * p2[0].1;
        for &(a, _) in &p1 {
            for &(b, _) in &p2 {
                nodes.push(SpherePoint::from_unit(vec![
                    Complex64::from_polar(c, a),
                    Complex64::from_polar(s, b),
                ]));
                weights.push(w);
            }
        }
    }
    Ok(QuadratureGrid {
        nodes: Nodes::Sphere(nodes),
        weights,
        kind: GridKind::Sphere,
        n: 1,
        resolution: vec![theta, phi1, phi2],
        orbit_size,
    })
}

fn axis_rule(m: usize, a: f64, b: f64, spacing: Spacing, power: i32) -> Vec<(f64, f64)> {
    match spacing {
        Spacing::Uniform => rules::gauss_legendre(m, a, b),
        Spacing::Graded { scale } => rules::sinh_mapped(m, a, b, scale.powi(power)),
    }
}

/// Product rule on `Sigma_R` with weights representing `dV_0 = 2^{2n} n! du`.
///
/// The ball `|z| < R` uses `z_j = r sqrt(lambda_j) e^{i phi_j}` with `lambda` on
/// the standard simplex, so `du_z = 2^{1-n} r^{2n-1} dr dlambda dphi`.
pub fn cylinder_grid(n: usize, radius: f64, res: CylinderResolution) -> Result<QuadratureGrid> {
    if n == 0 {
        return Err(Error::Grid("cylinder grids need n >= 1".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Grid(format!(
            "cylinder radius must be > 0 (got {radius})"
        )));
    }
    let CylinderResolution {
        radial,
        simplex,
        angular,
        vertical,
        spacing,
    } = res;
    if radial < 2 || vertical < 2 || angular < 4 || (n > 1 && simplex < 1) {
        return Err(Error::Grid(format!(
            "cylinder resolution too small (radial {radial} >= 2, vertical {vertical} >= 2, \
             angular {angular} >= 4, simplex {simplex} >= 1)"
        )));
    }
    if let Spacing::Graded { scale } = spacing {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Grid(format!(
                "graded spacing scale must be > 0 (got {scale})"
            )));
        }
    }
    let rr = axis_rule(radial, 0.0, radius, spacing, 1);
    let tt = axis_rule(vertical, -radius * radius, radius * radius, spacing, 2);
    let simp = rules::simplex(n - 1, simplex);
    let phase = rules::periodic(angular);

    let orbit_size = angular.pow(n as u32);
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let measure = 4f64.powi(n as i32) * factorial * 2f64.powi(1 - n as i32);
    let phase_weight = phase[0].1.powi(n as i32);

    let total = rr.len() * simp.len() * tt.len() * orbit_size;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for &(r, wr) in &rr {
        for (lambda, wl) in &simp {
            let moduli: Vec<f64> = lambda.iter().map(|l| r * l.sqrt()).collect();
            for &(t, wt) in &tt {
                let w = measure * wr * r.powi(2 * n as i32 - 1) * wl * wt * phase_weight;
                idx.iter_mut().for_each(|i| *i = 0);
                loop {
                    let z = moduli
                        .iter()
                        .zip(&idx)
                        .map(|(&m, &k)| Complex64::from_polar(m, phase[k].0))
                        .collect();
                    nodes.push(HPoint { z, t });
                    weights.push(w);
                    let mut pos = n;
                    let mut done = true;
                    while pos > 0 {
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < angular {
                            done = false;
                            break;
                        }
                        idx[pos] = 0;
                    }
                    if done {
                        break;
                    }
                }
            }
        }
    }
    let mut resolution = vec![radial];
    if n > 1 {
        resolution.push(simplex);
    }
    resolution.extend([angular, vertical]);
    Ok(QuadratureGrid {
        nodes: Nodes::Cylinder(nodes),
        weights,
        kind: GridKind::Cylinder,
        n,
        resolution,
        orbit_size,
    })
}

/// `2^{2n} n!` times the Lebesgue volume of `Sigma_R`.
pub fn cylinder_volume(n: usize, radius: f64) -> f64 {
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let ball = PI.powi(n as i32) / factorial * radius.powi(2 * n as i32);
    4f64.powi(n as i32) * factorial * ball * 2.0 * radius * radius
}
