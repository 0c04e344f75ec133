//! The CR sphere `S^{2n+1}` in `C^{n+1}`: its distance, the Cayley transform to
//! and from `H^n`, the Cayley Jacobian and the sphere extremals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, domain, Error, Result};
use crate::heisenberg::HPoint;
use crate::numerics::Params;

/// A unit vector of `C^{n+1}`. Renormalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    xi: Vec<Complex64>,
}

impl SpherePoint {
    pub fn new(xi: Vec<Complex64>) -> Result<Self> {
        if xi.len() < 2 {
            return Err(domain("sphere points need n + 1 >= 2 complex coordinates"));
        }
        let norm = xi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(domain(
                "cannot normalize a zero or non-finite vector onto the sphere",
            ));
        }
        Ok(Self {
            xi: xi.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Wraps coordinates that are already unit length. Callers guarantee it.
    pub(crate) fn from_unit(xi: Vec<Complex64>) -> Self {
        Self { xi }
    }

    /// The north pole `(0, ..., 0, 1)` of `S^{2n+1}`.
    pub fn north(n: usize) -> Self {
        let mut xi = vec![Complex64::new(0.0, 0.0); n + 1];
        xi[n] = Complex64::new(1.0, 0.0);
        Self { xi }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.xi
    }

    /// `n` such that the point lies on `S^{2n+1}`.
    pub fn n(&self) -> usize {
        self.xi.len() - 1
    }
}

/// `zeta . conj(eta)`.
#[inline]
pub(crate) fn hermitian(zeta: &[Complex64], eta: &[Complex64]) -> Complex64 {
    zeta.iter().zip(eta).map(|(a, b)| a * b.conj()).sum()
}

/// Squared sphere distance `2 |1 - zeta . conj(eta)|`, without allocation.
#[inline]
pub(crate) fn sphere_dist_sqr_unchecked(zeta: &[Complex64], eta: &[Complex64]) -> f64 {
    2.0 * (Complex64::new(1.0, 0.0) - hermitian(zeta, eta)).norm()
}

/// `d(zeta, eta) = (2 |1 - zeta . conj(eta)|)^{1/2}`.
pub fn sphere_dist(zeta: &SpherePoint, eta: &SpherePoint) -> Result<f64> {
    check_len(zeta.xi.len(), eta.xi.len())?;
    Ok(sphere_dist_sqr_unchecked(&zeta.xi, &eta.xi).sqrt())
}

/// `C(z, t) = (2 conj(z) / (1 + |z|^2 + it), (1 - |z|^2 - it) / (1 + |z|^2 + it))`.
///
/// The first block is conjugated so that, with the group law
/// `t + t' + 2 Im(z . conj(z'))`, the sphere distance of the images equals the
/// weighted Heisenberg distance `|v^{-1} u|`.
pub fn cayley(u: &HPoint) -> SpherePoint {
    let r2 = u.z_norm_sqr();
    let w = Complex64::new(1.0 + r2, u.t);
    let mut xi: Vec<Complex64> = u.z.iter().map(|c| 2.0 * c.conj() / w).collect();
    xi.push(Complex64::new(1.0 - r2, -u.t) / w);
    SpherePoint::from_unit(xi)
}

/// Inverse of [`cayley`]; the south pole `(0, ..., 0, -1)` is excluded.
pub fn cayley_inv(xi: &SpherePoint) -> Result<HPoint> {
    let n = xi.n();
    let last = xi.xi[n];
    let denom = Complex64::new(1.0, 0.0) + last;
    if denom.norm() < 1e-12 {
        return Err(Error::CayleyPole(denom.norm()));
    }
    let z = xi.xi[..n].iter().map(|c| (c / denom).conj()).collect();
    let t = ((Complex64::new(1.0, 0.0) - last) / denom).im;
    Ok(HPoint { z, t })
}

/// `J(z, t) = 2^{2n+1} / ((1 + |z|^2)^2 + t^2)^{n+1}`.
pub fn cayley_jacobian(u: &HPoint) -> f64 {
    let n = u.dim() as i32;
    let a = 1.0 + u.z_norm_sqr();
    2f64.powi(2 * n + 1) / (a * a + u.t * u.t).powi(n + 1)
}

/// `|1 - conj(pole) . zeta|^{-(Q + alpha)/2}` for a pole strictly inside the unit ball.
pub fn sphere_extremal(zeta: &SpherePoint, pole: &[Complex64], params: &Params) -> Result<f64> {
    check_len(zeta.xi.len(), pole.len())?;
    let pole_norm = pole.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(pole_norm < 1.0) {
        return Err(domain(format!(
            "extremal pole must satisfy |pole| < 1 (got {pole_norm})"
        )));
    }
    let inner: Complex64 = pole.iter().zip(&zeta.xi).map(|(p, z)| p.conj() * z).sum();
    let base = (Complex64::new(1.0, 0.0) - inner).norm();
    Ok(base.powf(-(params.q() + params.alpha) / 2.0))
}

/// A unitary map of `C^{n+1}` sending a chosen sphere point to the north pole.
///
/// Built from a complex Householder reflection followed by a phase, so it is a
/// CR automorphism of the sphere and preserves [`sphere_dist`].
#[derive(Debug, Clone)]
pub(crate) struct PoleAlignment {
    v: Vec<Complex64>,
    v_norm_sqr: f64,
    phase: Complex64,
}

impl PoleAlignment {
    pub(crate) fn new(center: &[Complex64]) -> Self {
        let m = center.len();
        let last = center[m - 1];
        let theta = if last.norm() > 0.0 { last.arg() } else { 0.0 };
        let target = Complex64::from_polar(1.0, theta);
        let mut v = center.to_vec();
        v[m - 1] -= target;
        let v_norm_sqr = v.iter().map(|c| c.norm_sqr()).sum();
        Self {
            v,
            v_norm_sqr,
            phase: Complex64::from_polar(1.0, -theta),
        }
    }

    pub(crate) fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        if self.v_norm_sqr < 1e-300 {
            return x.iter().map(|c| c * self.phase).collect();
        }
        // v* x
        let proj: Complex64 = self.v.iter().zip(x).map(|(a, b)| a.conj() * b).sum();
        let scale = 2.0 * proj / self.v_norm_sqr;
        x.iter()
            .zip(&self.v)
            .map(|(xi, vi)| (xi - vi * scale) * self.phase)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::hdist;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sp(v: &[(f64, f64)]) -> SpherePoint {
        SpherePoint::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn construction_normalizes() {
        let p = sp(&[(3.0, 0.0), (0.0, 4.0)]);
        let norm: f64 = p.coords().iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!(SpherePoint::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(SpherePoint::new(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn distance_examples() {
        let z = sp(&[(0.6, 0.0), (0.0, 0.8)]);
        assert!(sphere_dist(&z, &z).unwrap() < 1e-7);
        let anti = SpherePoint::new(z.coords().iter().map(|c| -c).collect()).unwrap();
        assert!((sphere_dist(&z, &anti).unwrap() - 2.0).abs() < 1e-15);
        let e1 = sp(&[(1.0, 0.0), (0.0, 0.0)]);
        let e2 = sp(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!((sphere_dist(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let e3 = SpherePoint::north(2);
        assert!(sphere_dist(&e1, &e3).is_err());
    }

    #[test]
    fn cayley_examples() {
        assert_eq!(cayley(&HPoint::origin(2)), SpherePoint::north(2));
        let xi = cayley(&HPoint {
            z: vec![c(0.0, 0.0)],
            t: 1.0,
        });
        assert!(xi.coords()[0].norm() < 1e-15);
        assert!((xi.coords()[1] - c(0.0, -1.0)).norm() < 1e-15);

        assert_eq!(
            cayley_inv(&SpherePoint::north(1)).unwrap(),
            HPoint::origin(1)
        );
        let south = sp(&[(0.0, 0.0), (-1.0, 0.0)]);
        assert!(matches!(cayley_inv(&south), Err(Error::CayleyPole(_))));
    }

    #[test]
    fn jacobian_examples() {
        assert!((cayley_jacobian(&HPoint::origin(1)) - 8.0).abs() < 1e-15);
        assert!(
            (cayley_jacobian(&HPoint {
                z: vec![c(1.0, 0.0)],
                t: 0.0
            }) - 0.5)
                .abs()
                < 1e-15
        );
        assert!((cayley_jacobian(&HPoint::origin(2)) - 32.0).abs() < 1e-15);
    }

    #[test]
    fn jacobian_decay() {
        // J ~ 2^{2n+1} |u|^{-2Q} at infinity.
        let n = 1;
        for s in [1e2, 1e3, 1e4] {
            let u = HPoint {
                z: vec![c(s, 0.0)],
                t: 0.5 * s * s,
            };
            let norm4 = s.powi(4) + 0.25 * s.powi(4);
            let asym = 8.0 / norm4.powi(n + 1);
            assert!((cayley_jacobian(&u) / asym - 1.0).abs() < 10.0 / (s * s));
        }
    }

    #[test]
    fn extremal_examples() {
        let p = Params::new(1, 2.0).unwrap();
        let zero = [c(0.0, 0.0), c(0.0, 0.0)];
        let z = sp(&[(0.3, -0.1), (0.5, 0.8)]);
        assert_eq!(sphere_extremal(&z, &zero, &p).unwrap(), 1.0);
        let e1 = sp(&[(1.0, 0.0), (0.0, 0.0)]);
        let v = sphere_extremal(&e1, &[c(0.5, 0.0), c(0.0, 0.0)], &p).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
        assert!(sphere_extremal(&e1, &[c(1.0, 0.0), c(0.0, 0.0)], &p).is_err());
        assert!(sphere_extremal(&e1, &[c(0.1, 0.0)], &p).is_err());
    }

    #[test]
    fn pole_alignment_maps_center_and_preserves_distance() {
        let a = sp(&[(0.2, 0.4), (-0.5, 0.1), (0.3, -0.6)]);
        let b = sp(&[(-0.7, 0.1), (0.2, 0.2), (0.1, 0.5)]);
        let rot = PoleAlignment::new(a.coords());
        let ra = rot.apply(a.coords());
        assert!(ra[0].norm() < 1e-14 && ra[1].norm() < 1e-14);
        assert!((ra[2] - c(1.0, 0.0)).norm() < 1e-14);
        let rb = rot.apply(b.coords());
        let d0 = sphere_dist(&a, &b).unwrap();
        let d1 = sphere_dist_sqr_unchecked(&ra, &rb).sqrt();
        assert!((d0 - d1).abs() < 1e-14);
        let north = SpherePoint::north(1);
        let id = PoleAlignment::new(north.coords());
        assert_eq!(id.apply(north.coords()), north.coords().to_vec());
    }

    fn arb_hpoint(n: usize) -> impl Strategy<Value = HPoint> {
        (
            prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), n),
            -8.0f64..8.0,
        )
            .prop_map(|(z, t)| HPoint {
                z: z.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
                t,
            })
    }

    fn weight(u: &HPoint) -> f64 {
        let a = 1.0 + u.z_norm_sqr();
        (4.0 / (a * a + u.t * u.t)).powf(0.25)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn cayley_round_trip(u in arb_hpoint(2)) {
            let xi = cayley(&u);
            let norm: f64 = xi.coords().iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let back = cayley_inv(&xi).unwrap();
            prop_assert!((back.t - u.t).abs() < 1e-10);
            for (a, b) in back.z.iter().zip(&u.z) {
                prop_assert!((a - b).norm() < 1e-10);
            }
            let again = cayley(&back);
            for (a, b) in again.coords().iter().zip(xi.coords()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn distance_relation(u in arb_hpoint(1), v in arb_hpoint(1)) {
            let ds = sphere_dist(&cayley(&u), &cayley(&v)).unwrap();
            let dh = hdist(&u, &v).unwrap() * weight(&u) * weight(&v);
            prop_assert!((ds - dh).abs() <= 1e-9 * dh.max(1e-3), "ds={} dh={}", ds, dh);
        }

        #[test]
        fn bounded_sets_stay_off_the_pole(u in arb_hpoint(2)) {
            // |u| <= ~5 here, so the last coordinate stays away from -1.
            let xi = cayley(&u);
            prop_assert!((Complex64::new(1.0, 0.0) + xi.coords()[2]).norm() > 1e-3);
        }

        #[test]
        fn extremal_positive(re in -0.6f64..0.6, im in -0.6f64..0.6, u in arb_hpoint(1)) {
            let p = Params::new(1, 1.3).unwrap();
            let pole = [Complex64::new(re, im), Complex64::new(0.1, -0.2)];
            let v = sphere_extremal(&cayley(&u), &pole, &p).unwrap();
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }
}
