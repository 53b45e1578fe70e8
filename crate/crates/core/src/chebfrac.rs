//! Chebyshev polynomials and the Chebyshev fractional integrals
//!
//! ```text
//! Υ₊ᵐ f(r)  = (2/√π) ∫_0^r T_m(t/r) f(t) / √(r²−t²) dt
//! Υ₋ᵐ f(t)  = (2/√π) ∫_t^∞ T_m(t/r) f(r) r / √(r²−t²) dr
//! Υ*₋ᵐ g(t) = (2t/√π) ∫_t^∞ g(r) T_m(r/t) / (r √(r²−t²)) dr
//! ```
//!
//! with `I½ = Υ⁰₋` and its left inverse `D½ φ = −½ d/dt [t · I½(r⁻² φ)]`.
//!
//! The square-root endpoint singularities are removed by substitution:
//! `t = r sin φ` on the finite interval and `r = √(t² + w²)` on the half
//! line, after which plain Gauss–Legendre panels converge geometrically.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::profile::{Monomial, RadialProfile, Tail};
use crate::quad::{self, derivative, Estimate, HalfLine, QuadratureSpec, Stencil};

/// `2/√π`.
pub const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Chebyshev polynomial of the first kind, continued by `cosh` outside
/// `[-1, 1]`.
pub fn cheb_t(l: u32, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        // The three-term recurrence is exact at ±1 and avoids the
        // ill-conditioned arccos near the endpoints.
        let (mut prev, mut cur) = (1.0, x);
        match l {
            0 => return 1.0,
            1 => return x,
            _ => {}
        }
        for _ in 1..l {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let v = (l as f64 * x.abs().acosh()).cosh();
        if x < 0.0 && l % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

fn parity_eta(m: u32) -> f64 {
    (m % 2) as f64
}

/// Integrability of `|f(t)| t^(-η)` on `(a, ∞)`, η = m mod 2, as certified
/// by the tail descriptor.
pub fn check_conv_minus(m: u32, f: &RadialProfile) -> bool {
    if f.is_zero() {
        return true;
    }
    match f.tail() {
        None => false,
        Some(tail) => tail.decay() + parity_eta(m) > 1.0,
    }
}

/// Integrability of `t^η |f(t)|` on `(0, b)`, η = m mod 2, as certified by
/// the origin descriptor.
pub fn check_conv_plus(m: u32, f: &RadialProfile) -> bool {
    f.is_zero() || f.origin() + parity_eta(m) > -1.0
}

fn finish(fine: f64, coarse: f64, q: &QuadratureSpec, what: &str) -> Result<Estimate> {
    if !fine.is_finite() {
        return Err(Error::Divergent(format!(
            "{what} produced a non-finite value"
        )));
    }
    Estimate::from_pair(fine, coarse).police(q, what)
}

/// `Υ₊ᵐ f(r)` via `t = r sin φ`.
pub fn ups_plus(m: u32, f: &RadialProfile, r: f64, q: &QuadratureSpec) -> Result<Estimate> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain {
            value: r,
            detail: "the left-sided integral needs r > 0".into(),
        });
    }
    if f.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    if r > f.coverage() && f.tail().is_none() {
        return Err(Error::Domain {
            value: r,
            detail: format!("profile covers [0, {}]", f.coverage()),
        });
    }
    if !check_conv_plus(m, f) {
        return Err(Error::Divergent(format!(
            "profile behaves like t^{} at the origin; order {m} needs a weaker singularity",
            f.origin()
        )));
    }
    let levels = if f.origin() < 0.0 { 48 } else { 0 };
    let mut failure = None;
    let mut run = |panels: usize| -> f64 {
        let integrand = |phi: f64| {
            let sp = phi.sin();
            match f.eval(r * sp) {
                Ok(v) => cheb_t(m, sp) * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        if levels > 0 {
            quad::graded_at_zero(FRAC_PI_2, 0.125, panels, levels, integrand)
        } else {
            quad::composite(0.0, FRAC_PI_2, panels, integrand)
        }
    };
    let fine = run(q.panels());
    let coarse = run((q.panels() / 2).max(1));
    if let Some(e) = failure {
        return Err(e);
    }
    finish(
        TWO_OVER_SQRT_PI * fine,
        TWO_OVER_SQRT_PI * coarse,
        q,
        "ups_plus",
    )
}

/// Half-line layout for `w ↦ integrand(√(t² + w²))` given the profile's
/// coverage and the integrand decay rate in `w`. A body longer than `r_max`
/// gets proportionally more panels.
fn half_line(f: &RadialProfile, t: f64, decay: f64, q: &QuadratureSpec) -> HalfLine {
    let cov = f.coverage();
    let split = if cov.is_finite() && cov > t {
        (cov * cov - t * t).sqrt()
    } else {
        q.r_max
    };
    let stretch = (split / q.r_max).ceil().max(1.0) as usize;
    HalfLine::new(split, q.panels() * stretch, q.tail_panels(), decay)
}

fn require_tail(f: &RadialProfile) -> Result<Tail> {
    f.tail().ok_or(Error::MissingTail)
}

/// Decay rate in `w` of `f(r) · r^extra` for `r = √(t²+w²)`.
fn integrand_decay(tail: Tail, extra: f64) -> f64 {
    match tail {
        Tail::Zero | Tail::Rapid => f64::INFINITY,
        Tail::Power(p) => p - extra,
    }
}

fn half_line_integral<F>(
    layout: HalfLine,
    what: &str,
    q: &QuadratureSpec,
    scale: f64,
    g: F,
) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut failure = None;
    let mut run = |layout: HalfLine| -> f64 {
        layout.integrate(|w: f64| match g(w) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        })
    };
    let fine = run(layout);
    let coarse = run(layout.coarse());
    if let Some(e) = failure {
        return Err(e);
    }
    finish(scale * fine, scale * coarse, q, what)
}

/// `Υ₋ᵐ f(t)` via `r = √(t² + w²)`.
pub fn ups_minus(m: u32, f: &RadialProfile, t: f64, q: &QuadratureSpec) -> Result<Estimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            value: t,
            detail: "the right-sided integral needs t > 0".into(),
        });
    }
    if f.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let tail = require_tail(f)?;
    let decay = integrand_decay(tail, -parity_eta(m));
    if decay <= 1.0 {
        return Err(Error::Divergent(format!(
            "tail r^-{} is too slow for order {m}",
            tail.decay()
        )));
    }
    let layout = half_line(f, t, decay, q);
    half_line_integral(layout, "ups_minus", q, TWO_OVER_SQRT_PI, |w| {
        let r = (t * t + w * w).sqrt();
        Ok(cheb_t(m, t / r) * f.eval(r)?)
    })
}

/// `Υ*₋ᵐ g(t)` via `r = √(t² + w²)`.
pub fn ups_minus_star(m: u32, g: &RadialProfile, t: f64, q: &QuadratureSpec) -> Result<Estimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            value: t,
            detail: "the adjoint integral needs t > 0".into(),
        });
    }
    if g.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let tail = require_tail(g)?;
    let decay = integrand_decay(tail, m as f64 - 2.0);
    if decay <= 1.0 {
        return Err(Error::Divergent(format!(
            "tail r^-{} is too slow for the order-{m} adjoint kernel",
            tail.decay()
        )));
    }
    let layout = half_line(g, t, decay, q);
    half_line_integral(layout, "ups_minus_star", q, TWO_OVER_SQRT_PI * t, |w| {
        let r2 = t * t + w * w;
        let r = r2.sqrt();
        Ok(g.eval(r)? * cheb_t(m, r / t) / r2)
    })
}

/// `I½ f(t) = (2/√π) ∫_t^∞ f(r) r / √(r²−t²) dr`.
pub fn i_half(f: &RadialProfile, t: f64, q: &QuadratureSpec) -> Result<Estimate> {
    ups_minus(0, f, t, q)
}

fn step(t: f64, q: &QuadratureSpec) -> f64 {
    q.fd_step * t.abs().max(1.0)
}

fn check_stencil(t: f64, h: f64, reach: f64) -> Result<()> {
    if t - reach * h <= 0.0 {
        return Err(Error::Domain {
            value: t,
            detail: format!("difference stencil of step {h:e} would cross the origin"),
        });
    }
    Ok(())
}

/// Scale a profile by `r^k`, adjusting descriptors.
fn scaled_by_power(f: &RadialProfile, k: i32) -> RadialProfile {
    let tail = f.tail().map(|tail| match tail {
        Tail::Power(p) => Tail::Power(p - k as f64),
        other => other,
    });
    f.map(move |r, v| v * r.powi(k), tail, f.origin() + k as f64)
}

/// Combine an outer difference estimate with the worst inner quadrature
/// error it may have amplified.
fn differentiate<F>(t: f64, q: &QuadratureSpec, stencil: Stencil, mut g: F) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let h = step(t, q);
    let reach = match stencil {
        Stencil::Central => 2.0,
        Stencil::Backward => 4.0,
    };
    check_stencil(t, h, reach)?;
    let mut inner = 0.0f64;
    let d = derivative(
        |x| {
            let e = g(x)?;
            inner = inner.max(e.error);
            Ok::<f64, Error>(e.value)
        },
        t,
        h,
        stencil,
    )?;
    Ok(Estimate {
        value: d.value,
        error: d.error + inner / h,
    })
}

/// `D½ φ(t) = −½ d/dt [t · I½(r⁻² φ)](t)`.
pub fn d_half(phi: &RadialProfile, t: f64, q: &QuadratureSpec) -> Result<Estimate> {
    d_half_with(phi, t, q, Stencil::Central)
}

pub(crate) fn d_half_with(
    phi: &RadialProfile,
    t: f64,
    q: &QuadratureSpec,
    stencil: Stencil,
) -> Result<Estimate> {
    if phi.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let inner = scaled_by_power(phi, -2);
    let d = differentiate(t, q, stencil, |x| {
        let e = i_half(&inner, x, q)?;
        Ok(Estimate {
            value: x * e.value,
            error: x * e.error,
        })
    })?;
    Ok(Estimate {
        value: -0.5 * d.value,
        error: 0.5 * d.error,
    })
}

/// Recover `f` from `g = Υ₋ᵐ f`.
///
/// Orders 0 and 1 go through `D½` (`Υ¹₋ f = t I½ t⁻¹ f`, so `f = t D½(g/r)`);
/// higher orders use `f = −½ d/dt Υ*₋ᵐ g`.
pub fn invert_ups_minus(m: u32, g: &RadialProfile, t: f64, q: &QuadratureSpec) -> Result<Estimate> {
    if g.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    match m {
        0 => d_half(g, t, q),
        1 => {
            let e = d_half(&scaled_by_power(g, -1), t, q)?;
            Ok(Estimate {
                value: t * e.value,
                error: t * e.error,
            })
        }
        _ => {
            let d = differentiate(t, q, Stencil::Central, |x| ups_minus_star(m, g, x, q))?;
            Ok(Estimate {
                value: -0.5 * d.value,
                error: 0.5 * d.error,
            })
        }
    }
}

fn null_count(m: u32, coeffs: &[f64]) -> Result<usize> {
    if m < 2 {
        return Err(Error::NullSpaceEmpty(m as i64));
    }
    let expected = (m / 2) as usize;
    if coeffs.len() != expected {
        return Err(Error::CoefficientCount {
            expected,
            got: coeffs.len(),
        });
    }
    Ok(expected)
}

/// `Σ_{k=0}^{M−1} c_k t^{2k−m}`, `M = ⌊m/2⌋`: annihilated by `Υ₋ᵐ`.
pub fn nullgen_minus(m: u32, coeffs: &[f64]) -> Result<RadialProfile> {
    null_count(m, coeffs)?;
    Ok(RadialProfile::polynomial(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| Monomial {
                coeff: c,
                power: 2 * k as i32 - m as i32,
            })
            .collect(),
    ))
}

/// `Σ_{j=1}^{M} c_j t^{m−2j}`, `M = ⌊m/2⌋`: annihilated by `Υ₊ᵐ`.
pub fn nullgen_plus(m: u32, coeffs: &[f64]) -> Result<RadialProfile> {
    null_count(m, coeffs)?;
    Ok(RadialProfile::polynomial(
        coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| Monomial {
                coeff: c,
                power: m as i32 - 2 * (j as i32 + 1),
            })
            .collect(),
    ))
}

/// `r z ∫_z^r T_l(p/z) T_l(p/r) / (√(r²−p²) √(p²−z²) p) dp`, which equals
/// π/2 for every `0 < z < r`. Evaluated after `p² = z² + (r²−z²) sin² φ`.
pub fn cormack_integral(l: u32, z: f64, r: f64, q: &QuadratureSpec) -> Result<Estimate> {
    if !(0.0 < z && z < r && r.is_finite()) {
        return Err(Error::Domain {
            value: z,
            detail: format!("need 0 < z < r, got z = {z}, r = {r}"),
        });
    }
    let gap = r * r - z * z;
    let run = |panels: usize| {
        quad::composite(0.0, FRAC_PI_2, panels, |phi: f64| {
            let p2 = z * z + gap * phi.sin().powi(2);
            let p = p2.sqrt();
            cheb_t(l, p / z) * cheb_t(l, p / r) / p2
        }) * r
            * z
    };
    finish(
        run(q.panels()),
        run((q.panels() / 2).max(1)),
        q,
        "cormack_integral",
    )
}

/// Absolute deviation of [`cormack_integral`] from π/2.
pub fn cormack_check(l: u32, z: f64, r: f64, q: &QuadratureSpec) -> Result<f64> {
    Ok((cormack_integral(l, z, r, q)?.value - FRAC_PI_2).abs())
}

/// `√π`.
pub fn sqrt_pi() -> f64 {
    PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn chebyshev_branches() {
        assert!((cheb_t(2, 0.5) + 0.5).abs() < 1e-15);
        assert!((cheb_t(3, 2.0) - 26.0).abs() < 1e-12);
        assert_eq!(cheb_t(5, -1.0), -1.0);
        assert!((cheb_t(3, -2.0) + 26.0).abs() < 1e-12);
        assert_eq!(cheb_t(0, 7.0), 1.0);
    }

    #[test]
    fn left_sided_examples() {
        let one = RadialProfile::constant(1.0);
        assert!((ups_plus(0, &one, 1.0, &q()).unwrap().value - sqrt_pi()).abs() < 1e-13);
        assert!(ups_plus(2, &one, 1.7, &q()).unwrap().value.abs() < 1e-14);
        let id = RadialProfile::analytic(|t| t, None);
        assert!((ups_plus(1, &id, 1.0, &q()).unwrap().value - sqrt_pi() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn right_sided_examples() {
        let gauss = RadialProfile::analytic(|r| (-r * r).exp(), Some(Tail::Rapid));
        assert!((ups_minus(0, &gauss, 0.5, &q()).unwrap().value - (-0.25f64).exp()).abs() < 1e-13);
        let algebraic =
            RadialProfile::analytic(|r| (1.0 + r * r).powf(-1.5), Some(Tail::Power(3.0)));
        for t in [0.1, 1.0, 3.0] {
            let v = ups_minus(0, &algebraic, t, &q()).unwrap().value;
            assert!(
                (v - TWO_OVER_SQRT_PI / (1.0 + t * t)).abs() < 1e-12,
                "{t}: {v}"
            );
        }
        let null = nullgen_minus(2, &[1.0]).unwrap();
        assert!(ups_minus(2, &null, 0.8, &q()).unwrap().value.abs() < 1e-12);
        let untailed = RadialProfile::analytic(|r| r, None);
        assert_eq!(ups_minus(0, &untailed, 1.0, &q()), Err(Error::MissingTail));
    }

    #[test]
    fn adjoint_example() {
        let g = RadialProfile::polynomial(vec![Monomial {
            coeff: 1.0,
            power: -2,
        }]);
        let v = ups_minus_star(1, &g, 1.0, &q()).unwrap().value;
        assert!((v - TWO_OVER_SQRT_PI).abs() < 1e-12, "{v}");
        assert_eq!(
            ups_minus_star(0, &RadialProfile::zero(), 1.0, &q())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn half_derivative_round_trips() {
        let phi = RadialProfile::analytic(|t| (-t * t).exp(), Some(Tail::Rapid));
        let v = d_half(&phi, 1.0, &q()).unwrap().value;
        assert!((v - (-1.0f64).exp()).abs() < 1e-8, "{v}");
        let phi =
            RadialProfile::analytic(|t| TWO_OVER_SQRT_PI / (1.0 + t * t), Some(Tail::Power(2.0)));
        let v = d_half(&phi, 2.0, &q()).unwrap().value;
        assert!((v - 5f64.powf(-1.5)).abs() < 1e-8, "{v}");
        assert!(matches!(
            d_half(&phi, 1e-5, &q()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn inversion_of_higher_orders() {
        let f0 = RadialProfile::analytic(|r| r * r * (-r * r).exp(), Some(Tail::Rapid));
        for m in [1u32, 2, 3] {
            let g = {
                let f0 = f0.clone();
                let q = q();
                RadialProfile::analytic(
                    move |t| ups_minus(m, &f0, t, &q).map_or(f64::NAN, |e| e.value),
                    Some(Tail::Rapid),
                )
            };
            for t in [0.5, 1.0, 2.0] {
                let v = invert_ups_minus(m, &g, t, &q()).unwrap().value;
                let want = t * t * (-t * t).exp();
                assert!((v - want).abs() < 1e-6, "m={m} t={t}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn convergence_predicates() {
        let tail3 = RadialProfile::analytic(|r| r, Some(Tail::Power(3.0)));
        assert!(check_conv_minus(1, &tail3));
        let slow = RadialProfile::analytic(|r| r, Some(Tail::Power(0.5)));
        assert!(!check_conv_minus(0, &slow));
        assert!(check_conv_plus(2, &RadialProfile::constant(1.0)));
        assert!(!check_conv_plus(0, &nullgen_minus(2, &[1.0]).unwrap()));
    }

    #[test]
    fn null_generators() {
        assert_eq!(nullgen_plus(1, &[]).unwrap_err(), Error::NullSpaceEmpty(1));
        assert!(matches!(
            nullgen_plus(4, &[1.0]),
            Err(Error::CoefficientCount {
                expected: 2,
                got: 1
            })
        ));
        let g = nullgen_plus(4, &[0.0, 1.0]).unwrap();
        assert_eq!(
            g.terms().unwrap(),
            &[Monomial {
                coeff: 1.0,
                power: 0
            }]
        );
        assert!(ups_plus(4, &g, 1.3, &q()).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn cormack_identity_at_moderate_ratio() {
        for l in 0..=8 {
            assert!(cormack_check(l, 0.9, 2.1, &q()).unwrap() < 1e-10);
        }
    }
}
