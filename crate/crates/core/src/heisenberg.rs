//! The Heisenberg group `H^n = C^n x R`: group law, homogeneous norm,
//! left-invariant distance, dilations and the extremal HLS profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, domain, Result};
use crate::numerics::Params;

/// A point `(z, t)` of `H^n` in Cartesian complex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub z: Vec<Complex64>,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: Vec<Complex64>, t: f64) -> Result<Self> {
        if z.is_empty() {
            return Err(domain("HPoint needs n >= 1 complex coordinates"));
        }
        if !t.is_finite() || z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(domain("HPoint coordinates must be finite"));
        }
        Ok(Self { z, t })
    }

    pub fn origin(n: usize) -> Self {
        Self {
            z: vec![Complex64::new(0.0, 0.0); n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// `|z|^2`.
    pub fn z_norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `Im(z . conj(w))` summed over coordinates.
pub(crate) fn symplectic(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter()
        .zip(w)
        .map(|(a, b)| a.im * b.re - a.re * b.im)
        .sum()
}

/// `(z,t)(z',t') = (z + z', t + t' + 2 Im(z . conj(z')))`.
pub fn group_mul(u: &HPoint, v: &HPoint) -> Result<HPoint> {
    check_len(u.dim(), v.dim())?;
    let z = u.z.iter().zip(&v.z).map(|(a, b)| a + b).collect();
    Ok(HPoint {
        z,
        t: u.t + v.t + 2.0 * symplectic(&u.z, &v.z),
    })
}

pub fn group_inv(u: &HPoint) -> HPoint {
    HPoint {
        z: u.z.iter().map(|c| -c).collect(),
        t: -u.t,
    }
}

/// Homogeneous norm `(|z|^4 + t^2)^{1/4}`.
pub fn hnorm(u: &HPoint) -> f64 {
    let r2 = u.z_norm_sqr();
    (r2 * r2 + u.t * u.t).sqrt().sqrt()
}

/// `d(u, v) = |v^{-1} u|`.
pub fn hdist(u: &HPoint, v: &HPoint) -> Result<f64> {
    check_len(u.dim(), v.dim())?;
    Ok(hdist_unchecked(&u.z, u.t, &v.z, v.t))
}

/// Square of the Heisenberg distance, computed without allocating.
/// `v^{-1} u = (z - z', t - t' - 2 Im(z' . conj(z)))`.
#[inline]
pub(crate) fn hdist_sqr_unchecked(z: &[Complex64], t: f64, w: &[Complex64], s: f64) -> f64 {
    let mut r2 = 0.0;
    let mut im = 0.0;
    for (a, b) in z.iter().zip(w) {
        let d = a - b;
        r2 += d.norm_sqr();
        im += b.im * a.re - b.re * a.im;
    }
    let dt = t - s - 2.0 * im;
    (r2 * r2 + dt * dt).sqrt()
}

#[inline]
pub(crate) fn hdist_unchecked(z: &[Complex64], t: f64, w: &[Complex64], s: f64) -> f64 {
    hdist_sqr_unchecked(z, t, w, s).sqrt()
}

/// Dilation `delta_r(z, t) = (r z, r^2 t)`.
pub fn dilate(r: f64, u: &HPoint) -> Result<HPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("dilation factor must be > 0 (got {r})")));
    }
    Ok(HPoint {
        z: u.z.iter().map(|c| c * r).collect(),
        t: r * r * u.t,
    })
}

/// `H(z,t) = ((1 + |z|^2)^2 + t^2)^{-(Q + alpha)/4}`.
pub fn extremal_h(u: &HPoint, params: &Params) -> f64 {
    extremal_h_parts(u.z_norm_sqr(), u.t, params)
}

#[inline]
pub(crate) fn extremal_h_parts(z_norm_sqr: f64, t: f64, params: &Params) -> f64 {
    let a = 1.0 + z_norm_sqr;
    (a * a + t * t).powf(-(params.q() + params.alpha) / 4.0)
}

/// `f_eps(u) = eps^{-(Q + alpha)/2} H(delta_{1/eps} u)`.
pub fn extremal_family(eps: f64, u: &HPoint, params: &Params) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain(format!("eps must be > 0 (got {eps})")));
    }
    Ok(extremal_family_parts(eps, u.z_norm_sqr(), u.t, params))
}

#[inline]
pub(crate) fn extremal_family_parts(eps: f64, z_norm_sqr: f64, t: f64, params: &Params) -> f64 {
    eps.powf(-(params.q() + params.alpha) / 2.0)
        * extremal_h_parts(z_norm_sqr / (eps * eps), t / (eps * eps), params)
}
