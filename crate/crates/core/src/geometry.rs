//! Coordinates on the cylinder `S¹×ℝ` and on the sphere of plane normals.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from π/2 below which a direction counts as equatorial.
pub const EQUATOR_TOL: f64 = 1e-12;

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A point `(e^{is}, t)` on the unit cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylPoint {
    s: f64,
    t: f64,
}

impl CylPoint {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !s.is_finite() || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cylinder point ({s}, {t}) is not finite"
            )));
        }
        Ok(Self {
            s: wrap_angle(s),
            t,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Embedding `(cos s, sin s, t)` in ℝ³.
    pub fn embed(&self) -> [f64; 3] {
        [self.s.cos(), self.s.sin(), self.t]
    }
}

/// A direction `ζ(θ, ρ)` on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereDir {
    theta: f64,
    rho: f64,
}

impl SphereDir {
    pub fn new(theta: f64, rho: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&rho) {
            return Err(Error::Domain {
                value: rho,
                detail: "rho must lie in [0, pi] and theta must be finite".into(),
            });
        }
        Ok(Self {
            theta: wrap_angle(theta),
            rho,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_equator(&self) -> bool {
        (self.rho - FRAC_PI_2).abs() <= EQUATOR_TOL
    }

    /// The antipodal direction `(θ+π, π−ρ)`.
    pub fn antipode(&self) -> Self {
        Self {
            theta: wrap_angle(self.theta + std::f64::consts::PI),
            rho: std::f64::consts::PI - self.rho,
        }
    }
}

/// Membership test for the set of non-equatorial directions.
#[derive(Debug, Clone, Copy, Default)]
pub struct XiDomain;

impl XiDomain {
    pub fn contains(d: &SphereDir) -> bool {
        !d.is_equator()
    }
}

/// Unit normal `(cos θ sin ρ, sin θ sin ρ, cos ρ)`.
pub fn normal_vector(d: &SphereDir) -> [f64; 3] {
    let (st, ct) = d.theta.sin_cos();
    let (sr, cr) = d.rho.sin_cos();
    [ct * sr, st * sr, cr]
}

/// The point above angle `s` on the intersection of the cylinder with the
/// plane through the origin normal to `d`.
pub fn ellipse_point(d: &SphereDir, s: f64) -> Result<CylPoint> {
    if d.is_equator() {
        return Err(Error::EquatorUndefined);
    }
    CylPoint::new(s, -d.rho.tan() * (d.theta - s).cos())
}

/// Inner product of the normal of `d` with the embedded point `p`.
pub fn incidence(d: &SphereDir, p: &CylPoint) -> f64 {
    let n = normal_vector(d);
    let x = p.embed();
    n[0] * x[0] + n[1] * x[1] + n[2] * x[2]
}

/// The two directions whose planes pass through `p` parametrised by the
/// auxiliary coordinate `v ≥ 0` used by the dual transform.
pub fn dual_directions(p: &CylPoint, v: f64) -> [SphereDir; 2] {
    let radius = (v * v + p.t * p.t).sqrt();
    let rho = radius.atan();
    let offset = if radius > 0.0 {
        (-p.t / radius).clamp(-1.0, 1.0).acos()
    } else {
        FRAC_PI_2
    };
    [
        SphereDir {
            theta: wrap_angle(p.s + offset),
            rho,
        },
        SphereDir {
            theta: wrap_angle(p.s - offset),
            rho,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn close(a: [f64; 3], b: [f64; 3]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn normals_at_special_directions() {
        assert!(close(
            normal_vector(&SphereDir::new(0.0, 0.0).unwrap()),
            [0.0, 0.0, 1.0]
        ));
        let eq = normal_vector(&SphereDir::new(0.0, FRAC_PI_2).unwrap());
        assert!((eq[0] - 1.0).abs() < 1e-15 && eq[2].abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let n = normal_vector(&SphereDir::new(FRAC_PI_2, FRAC_PI_4).unwrap());
        assert!(n[0].abs() < 1e-15 && (n[1] - h).abs() < 1e-15 && (n[2] - h).abs() < 1e-15);
    }

    #[test]
    fn ellipse_points() {
        let p = ellipse_point(&SphereDir::new(0.0, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!((p.s(), p.t()), (1.0, 0.0));
        let p = ellipse_point(&SphereDir::new(0.0, FRAC_PI_4).unwrap(), 0.0).unwrap();
        assert!((p.t() + 1.0).abs() < 1e-15);
        let p = ellipse_point(&SphereDir::new(FRAC_PI_3, FRAC_PI_4).unwrap(), FRAC_PI_3).unwrap();
        assert!((p.t() + 1.0).abs() < 1e-15);
        assert_eq!(
            ellipse_point(&SphereDir::new(0.3, FRAC_PI_2).unwrap(), 0.0),
            Err(Error::EquatorUndefined)
        );
    }

    #[test]
    fn incidence_values() {
        let (s, t, v) = (0.7, 0.3, 1.2);
        let p = CylPoint::new(s, t).unwrap();
        let radius: f64 = (v * v + t * t).sqrt();
        let d = SphereDir::new(s + (-t / radius).acos(), radius.atan()).unwrap();
        assert!(incidence(&d, &p).abs() < 1e-12);
        for d in dual_directions(&p, v) {
            assert!(incidence(&d, &p).abs() < 1e-12);
        }
        let pole = SphereDir::new(0.0, 0.0).unwrap();
        assert_eq!(incidence(&pole, &CylPoint::new(2.0, 0.0).unwrap()), 0.0);
        let d = SphereDir::new(0.0, FRAC_PI_4).unwrap();
        assert!((incidence(&d, &CylPoint::new(0.0, 1.0).unwrap()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constructors_normalise_and_validate() {
        assert!((CylPoint::new(-0.5, 0.0).unwrap().s() - (TAU - 0.5)).abs() < 1e-15);
        assert!(SphereDir::new(0.0, PI + 0.1).is_err());
        assert!(CylPoint::new(f64::NAN, 0.0).is_err());
        let d = SphereDir::new(1.0, 0.3).unwrap().antipode();
        assert!((d.theta() - (1.0 + PI)).abs() < 1e-15 && (d.rho() - (PI - 0.3)).abs() < 1e-15);
        assert!(!XiDomain::contains(
            &SphereDir::new(0.0, FRAC_PI_2).unwrap()
        ));
    }
}
