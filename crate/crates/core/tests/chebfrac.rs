use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use cylradon::chebfrac::*;
use cylradon::profile::Monomial;
use cylradon::{Error, QuadratureSpec, RadialProfile, Tail};
use proptest::prelude::*;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn gaussian() -> RadialProfile {
    RadialProfile::analytic(|r| (-r * r).exp(), Some(Tail::Rapid))
}

/// Midpoint-rule oracle for `∫_a^b h` with smooth `h`.
fn midpoint(a: f64, b: f64, n: usize, h: impl Fn(f64) -> f64) -> f64 {
    let w = (b - a) / n as f64;
    (0..n).map(|k| h(a + w * (k as f64 + 0.5))).sum::<f64>() * w
}

proptest! {
    #[test]
    fn recurrence_matches_trigonometric_form(l in 0u32..30, x in -1.0..1.0f64) {
        let want = (l as f64 * x.acos()).cos();
        prop_assert!((cheb_t(l, x) - want).abs() < 1e-12 * (1.0 + l as f64));
    }

    #[test]
    fn cosine_identity(l in 0u32..20, theta in 0.0..PI) {
        prop_assert!((cheb_t(l, theta.cos()) - (l as f64 * theta).cos()).abs() < 1e-12);
    }

    #[test]
    fn outside_the_interval_is_hyperbolic(l in 0u32..12, x in 1.0..5.0f64) {
        let want = (l as f64 * x.acosh()).cosh();
        prop_assert!((cheb_t(l, x) - want).abs() < 1e-12 * want);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(cheb_t(l, -x), sign * cheb_t(l, x));
    }

    #[test]
    fn cormack_identity_on_random_pairs(l in 0u32..=8, r in 0.05..3.0f64, ratio in 0.15..0.999f64) {
        prop_assert!(cormack_check(l, ratio * r, r, &q()).unwrap() < 1e-6);
    }

    #[test]
    fn minus_integral_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, t in 0.1..3.0f64) {
        let f = gaussian();
        let g = RadialProfile::analytic(|r| 1.0 / (1.0 + r * r).powi(2), Some(Tail::Power(4.0)));
        let (fa, gb) = (f.clone(), g.clone());
        let h = RadialProfile::analytic(move |r| a * fa.eval(r).unwrap() + b * gb.eval(r).unwrap(), Some(Tail::Power(4.0)));
        for m in [0, 1, 3] {
            let lhs = ups_minus(m, &h, t, &q()).unwrap().value;
            let rhs = a * ups_minus(m, &f, t, &q()).unwrap().value + b * ups_minus(m, &g, t, &q()).unwrap().value;
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}

#[test]
fn recurrence_endpoints_are_exact() {
    for l in 0..40 {
        assert_eq!(cheb_t(l, 1.0), 1.0);
        assert_eq!(cheb_t(l, -1.0), if l % 2 == 0 { 1.0 } else { -1.0 });
    }
}

#[test]
fn half_integral_of_gaussian() {
    for t in [0.1, 0.5, 1.0, 2.0, 3.0] {
        assert_abs_diff_eq!(
            i_half(&gaussian(), t, &q()).unwrap().value,
            (-t * t).exp(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn half_integral_of_rational_profile() {
    let f = RadialProfile::analytic(|r| (1.0 + r * r).powf(-1.5), Some(Tail::Power(3.0)));
    for t in [0.1, 1.0, 4.0] {
        let want = TWO_OVER_SQRT_PI / (1.0 + t * t);
        assert_abs_diff_eq!(
            ups_minus(0, &f, t, &q()).unwrap().value,
            want,
            epsilon = 1e-10
        );
    }
}

#[test]
fn plus_integral_against_midpoint_oracle() {
    // Υ₊ᵐ f(r) after t = r sin φ is (2/√π) ∫_0^{π/2} T_m(sin φ) f(r sin φ) dφ.
    let f = |t: f64| (1.0 + t).ln() * (-t).exp();
    let prof = RadialProfile::analytic(f, Some(Tail::Rapid));
    for (m, r) in [(0u32, 0.7), (3, 1.9), (6, 2.4)] {
        let oracle = TWO_OVER_SQRT_PI
            * midpoint(0.0, PI / 2.0, 200_000, |phi| {
                cheb_t(m, phi.sin()) * f(r * phi.sin())
            });
        assert_abs_diff_eq!(
            ups_plus(m, &prof, r, &q()).unwrap().value,
            oracle,
            epsilon = 1e-9
        );
    }
}

#[test]
fn plus_integral_kills_its_null_generators() {
    assert_abs_diff_eq!(
        ups_plus(2, &RadialProfile::constant(1.0), 1.3, &q())
            .unwrap()
            .value,
        0.0,
        epsilon = 1e-12
    );
    for m in 2..=8u32 {
        for j in 0..(m / 2) as usize {
            let mut c = vec![0.0; (m / 2) as usize];
            c[j] = 1.0;
            let p = nullgen_plus(m, &c).unwrap();
            for r in [0.4, 1.0, 2.5] {
                let scale = p.eval(r).unwrap().abs();
                assert!(
                    ups_plus(m, &p, r, &q()).unwrap().value.abs() < 1e-10 * scale.max(1.0),
                    "m={m} j={j} r={r}"
                );
            }
        }
    }
}

#[test]
fn minus_integral_kills_its_null_generators() {
    for m in 2..=8u32 {
        for j in 0..(m / 2) as usize {
            let mut c = vec![0.0; (m / 2) as usize];
            c[j] = 1.0;
            let p = nullgen_minus(m, &c).unwrap();
            for t in [0.4, 1.0, 2.5] {
                let scale = p.eval(t).unwrap().abs();
                assert!(
                    ups_minus(m, &p, t, &q()).unwrap().value.abs() < 1e-8 * scale,
                    "m={m} j={j} t={t}"
                );
            }
        }
    }
}

#[test]
fn adjoint_integral_of_rational_tail() {
    // Υ*₋⁰ g for g = r⁻¹: (2t/√π) ∫_t^∞ dr / (r² √(r²−t²)) = (2/√π) / t.
    let g = RadialProfile::polynomial(vec![Monomial {
        coeff: 1.0,
        power: -1,
    }]);
    for t in [0.5, 1.0, 3.0] {
        assert_abs_diff_eq!(
            ups_minus_star(0, &g, t, &q()).unwrap().value,
            TWO_OVER_SQRT_PI / t,
            epsilon = 1e-9
        );
    }
}

#[test]
fn inverses_recover_their_input() {
    let f = RadialProfile::analytic(|r| r * r * (-r * r).exp(), Some(Tail::Rapid)).with_origin(2.0);
    for m in [0u32, 1, 2, 3] {
        let fc = f.clone();
        let q = q();
        let g = RadialProfile::analytic(
            move |t| ups_minus(m, &fc, t, &q).unwrap().value,
            Some(Tail::Rapid),
        );
        for t in [0.3, 0.9, 1.8] {
            let back = invert_ups_minus(m, &g, t, &q).unwrap().value;
            assert_abs_diff_eq!(back, t * t * (-t * t).exp(), epsilon = 1e-6);
        }
    }
}

#[test]
fn half_derivative_inverts_half_integral() {
    let phi = RadialProfile::analytic(|t| (-t * t).exp(), Some(Tail::Rapid));
    // I½ of the Gaussian is the Gaussian, so D½ of it is the Gaussian too.
    for t in [0.3, 1.0, 2.0] {
        assert_abs_diff_eq!(
            d_half(&phi, t, &q()).unwrap().value,
            (-t * t).exp(),
            epsilon = 1e-7
        );
    }
}

#[test]
fn convergence_checks_follow_descriptors() {
    let slow = RadialProfile::analytic(|r| 1.0 / (1.0 + r), Some(Tail::Power(1.0)));
    assert!(!check_conv_minus(0, &slow));
    assert!(check_conv_minus(1, &slow));
    assert!(matches!(
        ups_minus(0, &slow, 1.0, &q()),
        Err(Error::Divergent(_))
    ));
    let untailed = RadialProfile::analytic(|r| r, None);
    assert_eq!(ups_minus(0, &untailed, 1.0, &q()), Err(Error::MissingTail));
    let singular = RadialProfile::analytic(|r| r.powf(-1.5), None).with_origin(-1.5);
    assert!(!check_conv_plus(0, &singular));
    assert!(matches!(
        ups_plus(0, &singular, 1.0, &q()),
        Err(Error::Divergent(_))
    ));
    assert!(matches!(
        ups_minus(0, &gaussian(), 0.0, &q()),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn null_generator_arguments_are_validated() {
    assert_eq!(nullgen_minus(1, &[]).unwrap_err(), Error::NullSpaceEmpty(1));
    assert!(matches!(
        nullgen_plus(6, &[1.0]),
        Err(Error::CoefficientCount {
            expected: 3,
            got: 1
        })
    ));
    assert!(nullgen_plus(4, &[0.0, 0.0]).unwrap().is_zero());
}
