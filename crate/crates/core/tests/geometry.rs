use std::f64::consts::{FRAC_PI_2, PI, TAU};

use cylradon::geometry::{
    dual_directions, ellipse_point, incidence, normal_vector, wrap_angle, XiDomain,
};
use cylradon::{CylPoint, Error, SphereDir};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn ellipse_points_lie_on_their_plane(theta in 0.0..TAU, rho in 0.0..PI, s in 0.0..TAU) {
        prop_assume!((rho - FRAC_PI_2).abs() > 1e-6);
        let d = SphereDir::new(theta, rho).unwrap();
        let p = ellipse_point(&d, s).unwrap();
        let scale = 1.0 + p.t().abs() * d.rho().cos().abs();
        prop_assert!(incidence(&d, &p).abs() < 1e-12 * scale);
    }

    #[test]
    fn dual_directions_contain_the_point(s in 0.0..TAU, t in -20.0..20.0f64, v in 0.0..50.0f64) {
        let p = CylPoint::new(s, t).unwrap();
        for d in dual_directions(&p, v) {
            prop_assert!(incidence(&d, &p).abs() < 1e-12);
            prop_assert!(d.rho() < FRAC_PI_2);
        }
    }

    #[test]
    fn normals_are_unit(theta in -10.0..10.0f64, rho in 0.0..PI) {
        let n = normal_vector(&SphereDir::new(theta, rho).unwrap());
        prop_assert!((n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn antipodes_share_a_plane(theta in 0.0..TAU, rho in 0.0..PI, s in 0.0..TAU) {
        prop_assume!((rho - FRAC_PI_2).abs() > 1e-6);
        let d = SphereDir::new(theta, rho).unwrap();
        let a = d.antipode();
        let (p, q) = (ellipse_point(&d, s).unwrap(), ellipse_point(&a, s).unwrap());
        prop_assert!((p.t() - q.t()).abs() < 1e-9 * (1.0 + p.t().abs()));
    }
}

#[test]
fn equator_has_no_ellipse() {
    let d = SphereDir::new(0.4, FRAC_PI_2).unwrap();
    assert!(d.is_equator());
    assert!(!XiDomain::contains(&d));
    assert_eq!(ellipse_point(&d, 0.0), Err(Error::EquatorUndefined));
}

#[test]
fn construction_validates_ranges() {
    assert!(SphereDir::new(0.0, -0.1).is_err());
    assert!(SphereDir::new(0.0, PI + 0.1).is_err());
    assert!(SphereDir::new(f64::NAN, 0.3).is_err());
    assert!(CylPoint::new(0.0, f64::INFINITY).is_err());
    assert_eq!(CylPoint::new(-FRAC_PI_2, 1.0).unwrap().s(), 1.5 * PI);
    assert_eq!(wrap_angle(TAU), 0.0);
}

#[test]
fn worked_dual_direction() {
    // s = 0.7, t = 0.3, v = 1.2.
    let p = CylPoint::new(0.7, 0.3).unwrap();
    let radius = 1.53f64.sqrt();
    let [d, _] = dual_directions(&p, 1.2);
    assert!((d.theta() - (0.7 + (-0.3 / radius).acos())).abs() < 1e-15);
    assert!((d.rho() - radius.atan()).abs() < 1e-15);
    assert!(incidence(&d, &p).abs() < 1e-15);
}
