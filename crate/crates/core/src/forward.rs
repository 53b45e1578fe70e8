//! The transform `Rf(θ, ρ) = (1/2π) ∫_0^{2π} f(s, −tan ρ cos(θ−s)) ds`, its
//! equator limit, and the L² norms on both sides.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Boundary, CylinderField, Parity, Sinogram, SphereField};
use crate::geometry::SphereDir;
use crate::quad::{self, HalfLine, QuadratureSpec};

/// Largest `|tan ρ|` evaluated by the ellipse formula.
pub const MAX_SLOPE: f64 = 1e8;

/// Trapezoid nodes per unit of `|tan ρ|`: keeps the node spacing well below
/// the width `1/|tan ρ|` of the window where the ellipse crosses `|t| ≲ 1`.
const NODES_PER_SLOPE: f64 = 64.0;

const MAX_NODES: usize = 1 << 21;

/// Number of trapezoid nodes for slope `tan ρ`: a power of two, so nodes
/// come in antipodal pairs.
pub fn trapezoid_nodes(slope: f64, q: &QuadratureSpec) -> usize {
    let wanted = (NODES_PER_SLOPE * slope.abs()).ceil().min(MAX_NODES as f64) as usize;
    quad::next_pow2(q.n_angular.max(wanted).max(2))
}

/// `Rf` at a non-equatorial direction.
pub fn radon_point(f: &CylinderField, d: &SphereDir, q: &QuadratureSpec) -> Result<Complex64> {
    if d.is_equator() {
        return Err(Error::EquatorUndefined);
    }
    let slope = d.rho().tan();
    if slope.abs() > MAX_SLOPE {
        return Err(Error::EquatorUndefined);
    }
    let theta = d.theta();
    let n = trapezoid_nodes(slope, q);
    let half = n / 2;
    let mut acc = Complex64::new(0.0, 0.0);
    // Node s = θ + φ pairs with s + π; their heights are exact negatives.
    for j in 0..half {
        let phi = TAU * j as f64 / n as f64;
        let t = -slope * phi.cos();
        let s = theta + phi;
        acc += f.eval(s, t) + f.eval(s + PI, -t);
    }
    Ok(acc / n as f64)
}

/// `Rf(θ, π/2) = (1/π) ∫_{θ+π/2}^{θ+3π/2} C(s) ds`.
pub fn radon_equator(f: &CylinderField, theta: f64, q: &QuadratureSpec) -> Result<Complex64> {
    match &f.boundary {
        Boundary::Vanishing => Ok(Complex64::new(0.0, 0.0)),
        Boundary::Limit(c) => {
            let lo = theta + FRAC_PI_2;
            let v: Complex64 = quad::composite(lo, lo + PI, q.panels(), |s: f64| c(s));
            Ok(v / PI)
        }
        Boundary::Unknown => Err(Error::MissingBoundaryData),
    }
}

/// `Rf` at any direction, routing the equator to its limit formula.
pub fn radon(f: &CylinderField, d: &SphereDir, q: &QuadratureSpec) -> Result<Complex64> {
    if d.is_equator() {
        radon_equator(f, d.theta(), q)
    } else {
        radon_point(f, d, q)
    }
}

/// `Rf` as a sphere field. The result is even by construction.
pub fn transform(f: &CylinderField, q: &QuadratureSpec) -> SphereField {
    let f = f.clone();
    let q = *q;
    let label = format!("R[{}]", f.label);
    // An integrable profile in t leaves mass ~ 1/tan ρ on the near-vertical
    // ellipses, so the transform vanishes to first order at the equator.
    let order = match (&f.boundary, f.decay) {
        (Boundary::Vanishing, Some(d)) if d.decay() > 1.0 => 1.0,
        _ => 0.0,
    };
    SphereField::new(
        label,
        move |theta, rho| radon(&f, &SphereDir::new(theta, rho)?, &q),
        Parity::Even,
    )
    .with_equator_order(order)
}

/// `Rf` on the product grid `thetas × rhos`, rows in parallel.
pub fn radon_grid(
    f: &CylinderField,
    thetas: &[f64],
    rhos: &[f64],
    q: &QuadratureSpec,
) -> Result<Sinogram> {
    let rows: Vec<Vec<Complex64>> = thetas
        .par_iter()
        .map(|&theta| {
            rhos.iter()
                .map(|&rho| radon(f, &SphereDir::new(theta, rho)?, q))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Sinogram::new(
        thetas.to_vec(),
        rhos.to_vec(),
        rows.into_iter().flatten().collect(),
    )
}

/// `‖f‖₂² = ∫_0^{2π} ∫_ℝ |f(s, t)|² dt ds`, square-rooted.
pub fn norm_cyl(f: &CylinderField, q: &QuadratureSpec) -> Result<f64> {
    if let Boundary::Limit(c) = &f.boundary {
        let probe = (0..16)
            .map(|k| c(TAU * k as f64 / 16.0).norm())
            .fold(0.0, f64::max);
        if probe > 0.0 {
            return Err(Error::Divergent(format!(
                "{} tends to a nonzero limit and is not square integrable",
                f.label
            )));
        }
    }
    let decay = f.decay.ok_or(Error::MissingTail)?.decay();
    if 2.0 * decay <= 1.0 {
        return Err(Error::Divergent(format!(
            "{} decays like |t|^-{decay}",
            f.label
        )));
    }
    let layout = HalfLine::new(q.r_max, q.panels(), q.tail_panels(), 2.0 * decay);
    let n = q.n_angular.max(4);
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|k| {
            let s = TAU * k as f64 / n as f64;
            layout.integrate(|t: f64| f.eval(s, t).norm_sqr() + f.eval(s, -t).norm_sqr())
        })
        .sum::<f64>()
        * TAU
        / n as f64;
    if !total.is_finite() {
        return Err(Error::Divergent(format!(
            "{} has infinite L2 norm",
            f.label
        )));
    }
    Ok(total.sqrt())
}

/// `‖g‖₂² = ∫_0^{2π} ∫_0^π |g(θ, ρ)|² sin ρ dρ dθ`, square-rooted. Even
/// fields are integrated over the upper hemisphere and doubled. Fields that
/// vanish at the equator are integrated in `x = tan ρ` with a tail map, which
/// keeps nodes away from the equator.
pub fn norm_sph(g: &SphereField, q: &QuadratureSpec) -> Result<f64> {
    let n = q.n_angular.max(4);
    let flat = |lo: f64, theta: f64, failure: &mut Option<Error>| -> f64 {
        quad::composite(lo, lo + FRAC_PI_2, q.panels(), |rho: f64| {
            match g.eval(theta, rho) {
                Ok(v) => v.norm_sqr() * rho.sin(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        })
    };
    // sin ρ dρ = x (1+x²)^{−3/2} dx, and |g|² ~ x^{−2k}.
    let layout = HalfLine::new(
        q.r_max,
        q.panels(),
        q.tail_panels(),
        2.0 + 2.0 * g.equator_order,
    );
    let mapped = |upper: bool, theta: f64, failure: &mut Option<Error>| -> f64 {
        layout.integrate(|x: f64| {
            let rho = if upper { x.atan() } else { PI - x.atan() };
            match g.eval(theta, rho) {
                Ok(v) => v.norm_sqr() * x / (1.0 + x * x).powf(1.5),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        })
    };
    let hemisphere = |upper: bool| -> Result<f64> {
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let theta = TAU * k as f64 / n as f64;
                let mut failure = None;
                let v = if g.equator_order > 0.0 {
                    mapped(upper, theta, &mut failure)
                } else {
                    flat(if upper { 0.0 } else { FRAC_PI_2 }, theta, &mut failure)
                };
                failure.map_or(Ok(v), Err)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rows.iter().sum::<f64>() * TAU / n as f64)
    };
    let total = if g.parity == Parity::Even {
        2.0 * hemisphere(true)?
    } else {
        hemisphere(true)? + hemisphere(false)?
    };
    if !total.is_finite() {
        return Err(Error::Divergent(format!(
            "{} has infinite L2 norm",
            g.label
        )));
    }
    Ok(total.sqrt())
}
