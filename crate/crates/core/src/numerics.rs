//! Dimensional bookkeeping, the log-Gamma function and the closed-form sharp
//! HLS constant on the Heisenberg group.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Exponents and dimensions shared by every formula in the crate.
///
/// Construct with [`Params::new`]; the derived fields are always consistent
/// with `n` and `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// CR dimension: the Heisenberg group is `C^n x R`, the sphere is `S^{2n+1}`.
    pub n: usize,
    /// Homogeneous dimension `Q = 2n + 2`.
    pub homogeneous_dim: usize,
    pub alpha: f64,
    /// `2Q / (Q - alpha)`.
    pub p_alpha: f64,
    /// `2Q / (Q + alpha)`, the critical exponent of the input norm.
    pub q_alpha: f64,
    /// `2Q / (Q - 2)`, the coefficient of the sublaplacian in the CR conformal Laplacian.
    pub b_n: f64,
}

impl Params {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be >= 1 (got n = 0)"));
        }
        let homogeneous_dim = 2 * n + 2;
        let q = homogeneous_dim as f64;
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(domain(format!(
                "alpha must satisfy alpha > 0 (got {alpha})"
            )));
        }
        if alpha >= q {
            return Err(domain(format!(
                "alpha must satisfy alpha < Q = 2n+2 = {homogeneous_dim} (got {alpha})"
            )));
        }
        Ok(Self {
            n,
            homogeneous_dim,
            alpha,
            p_alpha: 2.0 * q / (q - alpha),
            q_alpha: 2.0 * q / (q + alpha),
            b_n: 2.0 * q / (q - 2.0),
        })
    }

    /// `Q` as a float.
    pub fn q(&self) -> f64 {
        self.homogeneous_dim as f64
    }

    /// Exponent `(Q - alpha)/(Q - 2)` applied to a Green kernel.
    pub fn green_exponent(&self) -> f64 {
        (self.q() - self.alpha) / (self.q() - 2.0)
    }

    /// Exponent `alpha - Q` of the pure singular kernel `rho^{alpha - Q}`.
    pub fn singular_exponent(&self) -> f64 {
        self.alpha - self.q()
    }
}

/// Free-function alias of [`Params::new`].
pub fn make_params(n: usize, alpha: f64) -> Result<Params> {
    Params::new(n, alpha)
}

// Lanczos coefficients for g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// Natural logarithm of `Gamma(x)` for `x > 0`.
///
/// Arguments below 1/2 are shifted up once with `Gamma(x) = Gamma(x+1)/x`,
/// so no reflection is involved.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(domain(format!("log_gamma requires x > 0 (got {x})")));
    }
    if x < 0.5 {
        return Ok(lanczos_ln_gamma(x + 1.0) - x.ln());
    }
    Ok(lanczos_ln_gamma(x))
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// `D_H = (2 pi)^{(Q - alpha)/2} n! Gamma(alpha/2) / Gamma((Q + alpha)/4)^2`.
///
/// The same value is the sharp constant on the CR sphere with the volume
/// form `dV_S`.
pub fn sharp_constant_dh(params: &Params) -> f64 {
    let q = params.q();
    let a = params.alpha;
    let ln_factorial: f64 = (1..=params.n).map(|k| (k as f64).ln()).sum();
    // Both Gamma arguments are positive whenever Params is valid.
    let ln_value = 0.5 * (q - a) * (2.0 * PI).ln() + ln_factorial + log_gamma(a / 2.0).unwrap()
        - 2.0 * log_gamma((q + a) / 4.0).unwrap();
    ln_value.exp()
}
