use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use cylradon::field::{linspace, uniform_angles};
use cylradon::fourier::*;
use cylradon::phantoms::{self, from_id};
use cylradon::{CylinderSamples, ModeProfile, QuadratureSpec, RadialProfile, Side, Tail};
use num_complex::Complex64;
use proptest::prelude::*;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn analysis_then_synthesis_reproduces_band_limited_fields(
        a in -1.0..1.0f64, b in -1.0..1.0f64, s in 0.0..TAU, t in 0.0..2.5f64,
    ) {
        let f = from_id("gauss2").unwrap().combine(Complex64::new(a, 0.0), &from_id("gauss1").unwrap(), Complex64::new(b, 0.0));
        let grid = linspace(0.0, 3.0, 121);
        let ms = analyze_cyl(&f, 3, &grid, &q()).unwrap();
        let back = synthesize(&ms, s, t).unwrap();
        prop_assert!((back - f.eval(s, t)).norm() < 1e-5);
        let mirrored = synthesize(&ms, s, -t).unwrap();
        prop_assert!((mirrored - f.eval(s, -t)).norm() < 1e-5);
    }
}

#[test]
fn angular_coefficients_of_a_trig_polynomial() {
    let m = 16;
    let samples: Vec<Complex64> = uniform_angles(m)
        .iter()
        .map(|&s| Complex64::new(2.0 + 3.0 * (2.0 * s).cos(), (5.0 * s).sin()))
        .collect();
    let c = angular_coefficients(&samples, 6);
    let at = |n: i64| c[(n + 6) as usize];
    assert_abs_diff_eq!(at(0).re, 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(at(2).re, 1.5, epsilon = 1e-14);
    assert_abs_diff_eq!(at(-2).re, 1.5, epsilon = 1e-14);
    // i sin 5s = (e^{5is} − e^{−5is}) / 2.
    assert_abs_diff_eq!(at(5).re, 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(at(-5).re, -0.5, epsilon = 1e-14);
    assert!(at(1).norm() < 1e-14 && at(3).norm() < 1e-14);
}

#[test]
fn gaussian_modes_match_closed_forms() {
    for n in 0..=4i64 {
        let f = phantoms::gaussian_mode(n, 1.0).unwrap();
        let got = cylinder_mode(&f, -n, &q());
        let want = phantoms::gaussian_mode_profile(n, 1.0, -n);
        for t in [0.0, 0.5, 1.7] {
            assert_abs_diff_eq!(
                got.eval(t).unwrap().re,
                want.eval(t).unwrap().re,
                epsilon = 1e-14
            );
        }
    }
}

#[test]
fn two_paths_agree_for_low_modes() {
    let rhos = [0.2, 0.7, 1.1, 1.4];
    for id in ["gauss0", "gauss2", "bump"] {
        let r = mode_consistency(&from_id(id).unwrap(), 4, &rhos, &q()).unwrap();
        assert!(r.max_discrepancy < 1e-8, "{id}: {:?}", r.per_mode);
    }
}

#[test]
fn mode_forward_of_the_gaussian() {
    // G_0(arctan x) = e^{−x²/2} I₀(x²/2) for e^{−t²}.
    let f0 = ModeProfile::real(
        0,
        Side::Cylinder,
        RadialProfile::analytic(|t| (-t * t).exp(), Some(Tail::Rapid)),
    );
    for x in [0.3, 1.0, 2.0] {
        let want = phantoms::scaled_bessel_i0(x * x / 2.0);
        assert_abs_diff_eq!(
            mode_forward(&f0, x, &q()).unwrap().re,
            want,
            epsilon = 1e-10
        );
    }
}

#[test]
fn sampled_cylinder_grids_are_analysed() {
    let f = from_id("gauss2").unwrap();
    let ss = uniform_angles(16);
    let ts = linspace(-3.0, 3.0, 121);
    let values = ss
        .iter()
        .flat_map(|&s| ts.iter().map(move |&t| (s, t)))
        .map(|(s, t)| f.eval(s, t))
        .collect();
    let grid = CylinderSamples::new(ss, ts, values).unwrap();
    let ms = analyze_samples(&grid, 4, Side::Cylinder, Some(Tail::Rapid)).unwrap();
    assert_abs_diff_eq!(
        ms.get(2).unwrap().eval(1.0).unwrap().re,
        0.5 * (-1f64).exp(),
        epsilon = 1e-6
    );
    assert!(ms.get(1).unwrap().is_zero() || ms.get(1).unwrap().eval(1.0).unwrap().norm() < 1e-15);
    assert!(analyze_samples(&grid, 4, Side::Sphere, None).is_err());
    assert!(analyze_samples(&grid, 8, Side::Cylinder, None).is_err());
}

#[test]
fn mode_sets_reject_foreign_profiles() {
    let mut ms = ModeSet::new(2, Side::Cylinder, true);
    assert!(ms.insert(ModeProfile::zero(3, Side::Cylinder)).is_err());
    assert!(ms.insert(ModeProfile::zero(1, Side::Sphere)).is_err());
    ms.insert(ModeProfile::zero(-2, Side::Cylinder)).unwrap();
    assert_eq!(ms.len(), 1);
}
