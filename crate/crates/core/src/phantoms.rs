//! Closed-form test fields with known parity, tails and modes.
//!
//! String ids accepted by [`from_id`]:
//!
//! | id | field |
//! |----|-------|
//! | `gauss<N>[:scale]` | `t^|N| e^{−(t/scale)²} cos(N s)` (exponent 0 for N = 0) |
//! | `odd` | `t e^{−t²}` |
//! | `const:<c>` | `c` |
//! | `tail:cos`, `tail:const:<c>` | `tanh²t` blend tending to `C(s)` |
//! | `tcos` | `t cos s` |
//! | `bump` | `e^{−t² + t cos s}` |
//! | `collar:<a>` | `ψ_a(t)(1 + cos 2s)/2`, zero for `|t| ≤ a` |
//!
//! and by [`sphere_from_id`]: `const-sphere:<c>`, `cos-sphere`
//! (`cos θ sin 2ρ`), `cos2-sphere` (`cos 2θ sin² 2ρ`).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{CylinderField, Parity, SphereField};
use crate::profile::{ModeProfile, RadialProfile, Side, Tail};

/// Height exponent that keeps `t^k cos(ns)` even: `k ≡ n (mod 2)`, and the
/// smallest such `k ≥ max(|n|−1, 0)`, which is `|n|`.
pub fn gaussian_exponent(n: i64) -> i32 {
    n.unsigned_abs() as i32
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    Ok(())
}

/// `t^|n| e^{−(t/scale)²} cos(ns)`: even, rapidly decaying, and within the
/// growth condition `|F_n(t)| ≤ C |t|^{|n|−1}` near 0.
pub fn gaussian_mode(n: i64, scale: f64) -> Result<CylinderField> {
    check_scale(scale)?;
    let k = gaussian_exponent(n);
    let nf = n as f64;
    let peak = if k == 0 {
        1.0
    } else {
        (k as f64 / 2.0).powf(k as f64 / 2.0) * (-(k as f64) / 2.0).exp() * scale.powi(k)
    };
    Ok(CylinderField::real(
        format!("gauss{n}:{scale}"),
        move |s, t| t.powi(k) * (-(t / scale).powi(2)).exp() * (nf * s).cos(),
        Parity::Even,
    )
    .vanishing(Tail::Rapid)
    .with_bound(peak)
    .with_band(n.unsigned_abs() as u32))
}

/// Closed-form mode `F_m` of [`gaussian_mode`]`(n, scale)`.
pub fn gaussian_mode_profile(n: i64, scale: f64, m: i64) -> ModeProfile {
    if m.abs() != n.abs() {
        return ModeProfile::zero(m, Side::Cylinder);
    }
    let k = gaussian_exponent(n);
    let amp = if n == 0 { 1.0 } else { 0.5 };
    ModeProfile::real(
        m,
        Side::Cylinder,
        RadialProfile::analytic(
            move |t| amp * t.powi(k) * (-(t / scale).powi(2)).exp(),
            Some(Tail::Rapid),
        )
        .with_origin(k as f64),
    )
}

/// `t e^{−t²}`, odd under `(s, t) ↦ (s+π, −t)`.
pub fn odd_phantom() -> CylinderField {
    CylinderField::real("odd", |_, t| t * (-t * t).exp(), Parity::Odd)
        .vanishing(Tail::Rapid)
        .with_bound((0.5f64).sqrt() * (-0.5f64).exp())
        .with_band(0)
}

pub fn constant_phantom(c: f64) -> CylinderField {
    CylinderField::real(format!("const:{c}"), move |_, _| c, Parity::Even)
        .with_limit(move |_| Complex64::new(c, 0.0))
        .with_decay(Tail::Power(0.0))
        .with_bound(c.abs())
        .with_band(0)
}

/// `tanh²t · [C(s)(1+tanh t)/2 + C(s+π)(1−tanh t)/2]`: even, bounded by
/// `sup|C|`, tending to `C(s)` as `t → +∞` (and to `C(s+π)` as `t → −∞`).
pub fn tail_phantom<C>(label: impl Into<String>, c: C, bound: f64) -> CylinderField
where
    C: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let c = Arc::new(c);
    let limit = c.clone();
    CylinderField::real(
        label,
        move |s, t| {
            let th = t.tanh();
            th * th * (c(s) * (1.0 + th) / 2.0 + c(s + PI) * (1.0 - th) / 2.0)
        },
        Parity::Even,
    )
    .with_limit(move |s| Complex64::new(limit(s), 0.0))
    .with_decay(Tail::Power(0.0))
    .with_bound(bound)
}

/// `t cos s`: even, unbounded, with `Rf(θ, ρ) = −(tan ρ / 2) cos θ`.
pub fn height_cosine() -> CylinderField {
    CylinderField::real("tcos", |s, t| t * s.cos(), Parity::Even)
        .with_decay(Tail::Power(-1.0))
        .with_band(1)
}

/// `e^{−t² + t cos s}`: even, not band limited.
pub fn bump_phantom() -> CylinderField {
    CylinderField::real("bump", |s, t| (-t * t + t * s.cos()).exp(), Parity::Even)
        .vanishing(Tail::Rapid)
        .with_bound((0.25f64).exp())
}

/// `ψ_a(t) (1 + cos 2s) / 2` with `ψ_a(t) = exp(−1/(t²−a²) − t²/4)` for
/// `|t| > a` and 0 otherwise: smooth, even, and supported away from the
/// band `|t| ≤ a`, so its transform vanishes on the cap `ρ ≤ arctan a`.
pub fn collar_phantom(a: f64) -> Result<CylinderField> {
    check_scale(a)?;
    Ok(CylinderField::real(
        format!("collar:{a}"),
        move |s, t| {
            let gap = t * t - a * a;
            if gap <= 0.0 {
                0.0
            } else {
                (-1.0 / gap - t * t / 4.0).exp() * (1.0 + (2.0 * s).cos()) / 2.0
            }
        },
        Parity::Even,
    )
    .vanishing(Tail::Rapid)
    .with_bound(1.0)
    .with_band(2))
}

/// `cos θ sin 2ρ`, even on the sphere and vanishing to first order at the
/// equator.
pub fn sphere_cosine() -> SphereField {
    SphereField::real(
        "cos-sphere",
        |theta, rho| theta.cos() * (2.0 * rho).sin(),
        Parity::Even,
    )
    .with_equator_order(1.0)
}

/// `cos 2θ sin² 2ρ`, even and vanishing to second order at the equator.
pub fn sphere_cosine2() -> SphereField {
    SphereField::real(
        "cos2-sphere",
        |theta, rho| (2.0 * theta).cos() * (2.0 * rho).sin().powi(2),
        Parity::Even,
    )
    .with_equator_order(2.0)
}

fn parse_number(text: &str, id: &str) -> Result<f64> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidParameter(format!("bad number in phantom id {id:?}")))
}

/// Cylinder phantom by id; see the module docs for the grammar.
pub fn from_id(id: &str) -> Result<CylinderField> {
    if let Some(rest) = id.strip_prefix("gauss") {
        let (order, scale) = match rest.split_once(':') {
            Some((o, s)) => (o, parse_number(s, id)?),
            None => (rest, 1.0),
        };
        let n: i64 = order
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad mode order in phantom id {id:?}")))?;
        return gaussian_mode(n, scale);
    }
    if let Some(c) = id.strip_prefix("const:") {
        return Ok(constant_phantom(parse_number(c, id)?));
    }
    if let Some(a) = id.strip_prefix("collar:") {
        return collar_phantom(parse_number(a, id)?);
    }
    if let Some(c) = id.strip_prefix("tail:const:") {
        let c = parse_number(c, id)?;
        return Ok(tail_phantom(id, move |_| c, c.abs()));
    }
    match id {
        "odd" => Ok(odd_phantom()),
        "tcos" => Ok(height_cosine()),
        "bump" => Ok(bump_phantom()),
        "tail:cos" => Ok(tail_phantom(id, f64::cos, 1.0)),
        _ => Err(Error::InvalidParameter(format!(
            "unknown phantom id {id:?}"
        ))),
    }
}

/// Sphere phantom by id.
pub fn sphere_from_id(id: &str) -> Result<SphereField> {
    if let Some(c) = id.strip_prefix("const-sphere:") {
        return Ok(SphereField::constant(parse_number(c, id)?));
    }
    match id {
        "cos-sphere" => Ok(sphere_cosine()),
        "cos2-sphere" => Ok(sphere_cosine2()),
        _ => Err(Error::InvalidParameter(format!(
            "unknown sphere phantom id {id:?}"
        ))),
    }
}

/// `e^{−z} I₀(z)` for `z ≥ 0`.
pub fn scaled_bessel_i0(z: f64) -> f64 {
    if z < 25.0 {
        let (mut term, mut sum, mut k) = (1.0, 1.0, 0.0);
        let quarter = z * z / 4.0;
        while term > 1e-17 * sum {
            k += 1.0;
            term *= quarter / (k * k);
            sum += term;
        }
        sum * (-z).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let odd = (2 * k - 1) as f64;
            term *= odd * odd / (8.0 * k as f64 * z);
            sum += term;
        }
        sum / (std::f64::consts::TAU * z).sqrt()
    }
}

/// Closed-form transform of a cylinder phantom, when one is known.
pub fn known_transform(id: &str) -> Option<SphereField> {
    let f = from_id(id).ok()?;
    match id {
        "odd" => Some(SphereField::constant(0.0)),
        "tcos" => Some(SphereField::new(
            "R[tcos]",
            |theta, rho| {
                if (rho - FRAC_PI_2).abs() < crate::geometry::EQUATOR_TOL {
                    return Err(Error::EquatorUndefined);
                }
                Ok(Complex64::new(-rho.tan() / 2.0 * theta.cos(), 0.0))
            },
            Parity::Even,
        )),
        _ if id.starts_with("const:") => Some(SphereField::constant(f.eval(0.0, 0.0).re)),
        _ if id.starts_with("gauss0") => {
            // (1/2π) ∫ exp(−x² cos² φ / σ²) dφ = e^{−z} I₀(z), z = x²/(2σ²).
            let scale = id
                .split_once(':')
                .map_or(Some(1.0), |(_, v)| v.parse().ok())?;
            Some(SphereField::real(
                "R[gauss0]",
                move |_, rho| {
                    let x = rho.tan();
                    if x.abs() > 1e150 {
                        0.0
                    } else {
                        scaled_bessel_i0(x * x / (2.0 * scale * scale))
                    }
                },
                Parity::Even,
            ))
        }
        _ => None,
    }
}

/// Closed-form dual transform of a sphere phantom, when one is known.
pub fn known_dual(id: &str) -> Option<CylinderField> {
    let c = id.strip_prefix("const-sphere:")?.parse::<f64>().ok()?;
    Some(
        CylinderField::real(
            format!("R*[{id}]"),
            move |_, t| 2.0 * c / (PI * (1.0 + t * t)),
            Parity::Even,
        )
        .vanishing(Tail::Power(2.0)),
    )
}

/// Largest violation of the declared parity over `draws` random points with
/// `s ∈ [0, 2π)`, `t ∈ [−6, 6]`. Fields of mixed or unknown parity report 0.
pub fn parity_defect(f: &CylinderField, draws: usize, seed: u64) -> f64 {
    let sign = match f.parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
        Parity::Mixed | Parity::Unknown => return 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let s = rng.gen_range(0.0..TAU);
            let t = rng.gen_range(-6.0..6.0);
            (f.eval(s + PI, -t) - f.eval(s, t) * sign).norm()
        })
        .fold(0.0, f64::max)
}

/// Largest violation of `g(θ+π, π−ρ) = ±g(θ, ρ)` away from the equator.
pub fn sphere_parity_defect(g: &SphereField, draws: usize, seed: u64) -> Result<f64> {
    let sign = match g.parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
        Parity::Mixed | Parity::Unknown => return Ok(0.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let theta = rng.gen_range(0.0..TAU);
        let rho = rng.gen_range(0.0..1.5);
        worst = worst.max((g.eval(theta + PI, PI - rho)? - g.eval(theta, rho)? * sign).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        for id in [
            "gauss0",
            "gauss2",
            "gauss-3:0.5",
            "odd",
            "const:2.5",
            "tail:cos",
            "tail:const:1",
            "tcos",
            "bump",
            "collar:1.5",
        ] {
            assert!(from_id(id).is_ok(), "{id}");
        }
        for id in [
            "gauss",
            "gaussx",
            "gauss1:-1",
            "const:abc",
            "collar:0",
            "nope",
        ] {
            assert!(from_id(id).is_err(), "{id}");
        }
        assert!(sphere_from_id("const-sphere:1").is_ok());
        assert!(sphere_from_id("sphere").is_err());
    }

    #[test]
    fn declared_parities_hold() {
        for id in [
            "gauss0",
            "gauss1",
            "gauss2",
            "gauss5:0.7",
            "odd",
            "const:2.5",
            "tail:cos",
            "tcos",
            "bump",
            "collar:1.5",
        ] {
            let f = from_id(id).unwrap();
            assert!(parity_defect(&f, 1000, 7) < 1e-12, "{id}");
        }
        for id in ["const-sphere:1", "cos-sphere", "cos2-sphere"] {
            assert!(sphere_parity_defect(&sphere_from_id(id).unwrap(), 1000, 7).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bessel_branches_agree() {
        for z in [0.0, 0.5, 3.0, 24.999] {
            let below = scaled_bessel_i0(z);
            assert!(below > 0.0 && below <= 1.0);
        }
        // I₀(1/2) = 1.0634833707413236.
        assert!((scaled_bessel_i0(0.5) - 1.0634833707413236 * (-0.5f64).exp()).abs() < 1e-15);
        let (a, b) = (scaled_bessel_i0(24.9999999), scaled_bessel_i0(25.0));
        assert!((a - b).abs() < 1e-8 * a);
    }

    #[test]
    fn tail_limit_is_reached() {
        let f = from_id("tail:cos").unwrap();
        assert!((f.eval(0.3, 40.0).re - 0.3f64.cos()).abs() < 1e-15);
        assert!((f.eval(0.3, -40.0).re - (0.3 + PI).cos()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_modes_match_the_field() {
        let f = gaussian_mode(3, 1.0).unwrap();
        let p = gaussian_mode_profile(3, 1.0, -3);
        let t = 0.8;
        assert!((p.eval(t).unwrap().re - 0.5 * t.powi(3) * (-t * t).exp()).abs() < 1e-15);
        assert!((f.eval(0.0, t).re - 2.0 * p.eval(t).unwrap().re).abs() < 1e-15);
    }
}
