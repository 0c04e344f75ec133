//! Resolved run configuration: defaults, then a JSON file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discretization::{CylinderResolution, Spacing, SphereResolution};
use crate::error::{domain, Error, Result};
use crate::numerics::Params;
use crate::solver::SolverOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub alpha: f64,
    /// Sphere rule orders.
    pub theta: usize,
    pub phi1: usize,
    pub phi2: usize,
    /// Cylinder rule orders.
    pub radial: usize,
    pub simplex: usize,
    pub angular: usize,
    pub vertical: usize,
    /// Use the sinh-graded cylinder rule with scale `eps`.
    pub graded: bool,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    /// `R`; when absent, `ratio * eps`.
    pub radius: Option<f64>,
    pub ratio: f64,
    pub ratios: Vec<f64>,
    pub p: f64,
    /// Continuation exponents; empty means the default schedule.
    pub p_schedule: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub a0: Vec<f64>,
    pub c_w: f64,
    pub seed: u64,
    /// `random`, `ones`, or `const:<value>` for the covariance check;
    /// `ones` or `maximizer` for the curvature residual.
    pub phi: String,
    pub nodes: usize,
    pub pairs: usize,
    pub blowup_radius: f64,
    pub kernel: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub strict: bool,
    /// Not part of the result; thread count never changes the numbers.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            command: String::new(),
            n: 1,
            alpha: 2.0,
            theta: 32,
            phi1: 128,
            phi2: 128,
            radial: 20,
            simplex: 2,
            angular: 32,
            vertical: 160,
            graded: true,
            eps: 0.02,
            eps_list: vec![0.05, 0.1, 0.2],
            radius: None,
            ratio: 50.0,
            ratios: vec![8.0, 16.0, 32.0, 64.0],
            p: 1.5,
            p_schedule: Vec::new(),
            tol: solver.tol,
            max_iter: solver.max_iter,
            a0: vec![0.5, 1.0, 2.0],
            c_w: 0.0,
            seed: 7,
            phi: "random".into(),
            nodes: 50,
            pairs: 100,
            blowup_radius: 4.0,
            kernel: None,
            weights: None,
            output: None,
            strict: false,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.n, self.alpha)
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn sphere_resolution(&self) -> SphereResolution {
        SphereResolution {
            theta: self.theta,
            phi1: self.phi1,
            phi2: self.phi2,
        }
    }

    pub fn cylinder_resolution(&self, eps: f64) -> CylinderResolution {
        CylinderResolution {
            radial: self.radial,
            simplex: self.simplex,
            angular: self.angular,
            vertical: self.vertical,
            spacing: if self.graded {
                Spacing::Graded { scale: eps }
            } else {
                Spacing::Uniform
            },
        }
    }

    pub fn radius_for(&self, eps: f64) -> f64 {
        self.radius.unwrap_or(self.ratio * eps)
    }

    /// Checks the preconditions of the dispatched command before any grid is built.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be > 0 (got {v})")));
            }
            Ok(())
        };
        let sphere = |cfg: &Self| -> Result<()> {
            if cfg.n != 1 {
                return Err(domain(format!(
                    "sphere grids need n = 1 (got n = {})",
                    cfg.n
                )));
            }
            if cfg.theta < 4 || cfg.phi1 < 4 || cfg.phi2 < 4 {
                return Err(domain("sphere resolution components must be >= 4"));
            }
            Ok(())
        };
        let cylinder = |cfg: &Self| -> Result<()> {
            if cfg.radial < 2 || cfg.vertical < 2 || cfg.angular < 4 || cfg.simplex < 1 {
                return Err(domain(
                    "cylinder resolution needs radial, vertical >= 2, angular >= 4, simplex >= 1",
                ));
            }
            Ok(())
        };
        let params = self.params()?;
        positive("tol", self.tol)?;
        if self.max_iter == 0 {
            return Err(domain("max_iter must be >= 1"));
        }
        match self.command.as_str() {
            "constants" => Ok(()),
            "verify-hls" => {
                cylinder(self)?;
                if self.eps_list.is_empty() {
                    return Err(domain("eps_list must not be empty"));
                }
                for &e in &self.eps_list {
                    positive("eps", e)?;
                }
                if !(self.ratio > 1.0) {
                    return Err(domain(format!(
                        "ratio R/eps must be > 1 (got {})",
                        self.ratio
                    )));
                }
                Ok(())
            }
            "lower-bound" => {
                cylinder(self)?;
                positive("eps", self.eps)?;
                let r = self.radius_for(self.eps);
                if !(r > self.eps) {
                    return Err(domain(format!(
                        "need eps < R (got eps = {}, R = {r})",
                        self.eps
                    )));
                }
                Ok(())
            }
            "tail-integral" => {
                positive("eps", self.eps)?;
                if self.ratios.iter().any(|&r| !(r > 1.0)) || self.ratios.is_empty() {
                    return Err(domain("ratios must be non-empty and > 1"));
                }
                Ok(())
            }
            "extremal-sub" => {
                if self.kernel.is_none() {
                    sphere(self)?;
                }
                if self.weights.is_some() && self.kernel.is_none() {
                    return Err(domain("--weights needs --kernel"));
                }
                let lo = if self.kernel.is_some() {
                    1.0
                } else {
                    params.q_alpha
                };
                if !(self.p > lo && self.p < 2.0) {
                    return Err(domain(format!(
                        "p must lie in the subcritical window ({lo}, 2) (got {})",
                        self.p
                    )));
                }
                positive("blowup_radius", self.blowup_radius)
            }
            "continuation" | "curvature-residual" => {
                sphere(self)?;
                for w in self.p_schedule.windows(2) {
                    if !(w[1] < w[0]) {
                        return Err(domain("p_schedule must be strictly decreasing"));
                    }
                }
                if let Some(&p) = self
                    .p_schedule
                    .iter()
                    .find(|&&p| !(p > params.q_alpha && p < 2.0))
                {
                    return Err(domain(format!(
                        "p_schedule entries must lie in ({}, 2) (got {p})",
                        params.q_alpha
                    )));
                }
                if self.command == "curvature-residual"
                    && !["ones", "maximizer"].contains(&self.phi.as_str())
                {
                    return Err(domain(format!(
                        "phi must be 'ones' or 'maximizer' (got '{}')",
                        self.phi
                    )));
                }
                Ok(())
            }
            "mass-experiment" => {
                sphere(self)?;
                if let Some(a) = self.a0.iter().find(|a| !(**a >= 0.0)) {
                    return Err(domain(format!("A0 must be >= 0 (got {a})")));
                }
                if self.a0.is_empty() {
                    return Err(domain("a0 list must not be empty"));
                }
                if !(self.c_w >= 0.0) || !self.c_w.is_finite() {
                    return Err(domain(format!("c_w must be >= 0 (got {})", self.c_w)));
                }
                Ok(())
            }
            "covariance-check" => {
                if self.nodes < 2 || self.pairs == 0 {
                    return Err(domain("covariance check needs nodes >= 2 and pairs >= 1"));
                }
                self.phi_mode().map(|_| ())
            }
            other => Err(domain(format!("unknown command '{other}'"))),
        }
    }

    pub(crate) fn phi_mode(&self) -> Result<PhiMode> {
        match self.phi.as_str() {
            "random" => Ok(PhiMode::Random),
            "ones" => Ok(PhiMode::Constant(1.0)),
            s => match s.strip_prefix("const:").map(str::parse::<f64>) {
                Some(Ok(c)) if c > 0.0 => Ok(PhiMode::Constant(c)),
                _ => Err(domain(format!(
                    "phi must be 'random', 'ones' or 'const:<c>' with c > 0 (got '{s}')"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PhiMode {
    Random,
    Constant(f64),
}
