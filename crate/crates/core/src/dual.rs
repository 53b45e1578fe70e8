//! The dual transform
//!
//! ```text
//! R*g(s, t) = (1/π) Σ_{σ=±1} ∫_0^∞ g(s + σ arccos(−t/√(v²+t²)), arctan √(v²+t²)) dv / (1+v²+t²)^{3/2}
//! ```
//!
//! its pairing with `R`, and its action and inverse on circular harmonics,
//! `H_n(t) = ((−1)^|n| / √π) Υ₋^|n| G_n^#(t)` with
//! `G_n^#(ω) = G_n(arctan ω) / (1+ω²)^{3/2}`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chebfrac::{self, sqrt_pi};
use crate::error::{Error, Result};
use crate::field::{CylinderField, CylinderSamples, Grid2, Parity, SphereField};
use crate::forward;
use crate::fourier;
use crate::geometry::{dual_directions, CylPoint, SphereDir};
use crate::inversion::MODE_FLOOR;
use crate::nullspace;
use crate::profile::{parity_sign, ModeProfile, RadialProfile, Side, Tail};
use crate::quad::{self, Estimate, HalfLine, QuadratureSpec};

/// Halvings of the innermost panel towards `u = 0`, where the direction
/// angle turns over on the scale `|t|`.
const GRADED_LEVELS: usize = 30;

fn refuse_odd(g: &SphereField) -> Result<()> {
    if g.parity == Parity::Odd {
        return Err(Error::OddInput);
    }
    Ok(())
}

/// `R*g` at `p`. Only the upper hemisphere of `g` is read, so the result is
/// the dual transform of the even extension of that hemisphere.
pub fn dual_point(g: &SphereField, p: &CylPoint, q: &QuadratureSpec) -> Result<Complex64> {
    dual_point_observed(g, p, q, |_| {})
}

/// [`dual_point`], reporting every sampled direction to `observer`.
pub fn dual_point_observed<O>(
    g: &SphereField,
    p: &CylPoint,
    q: &QuadratureSpec,
    mut observer: O,
) -> Result<Complex64>
where
    O: FnMut(&SphereDir),
{
    refuse_odd(g)?;
    let a2 = 1.0 + p.t() * p.t();
    let a = a2.sqrt();
    let mut failure = None;
    // v = a tan u turns dv / (a² + v²)^{3/2} into cos u du / a².
    let mut run = |panels: usize| -> Complex64 {
        quad::graded_at_zero(FRAC_PI_2, 0.125, panels, GRADED_LEVELS, |u: f64| {
            let v = a * u.tan();
            let mut acc = Complex64::new(0.0, 0.0);
            for d in dual_directions(p, v) {
                observer(&d);
                match g.eval(d.theta(), d.rho()) {
                    Ok(value) => acc += value,
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
            }
            acc * u.cos()
        })
    };
    let fine = run(q.panels());
    let coarse = run((q.panels() / 2).max(1));
    if let Some(e) = failure {
        return Err(e);
    }
    let scale = 1.0 / (PI * a2);
    Estimate {
        value: (fine * scale).norm(),
        error: ((fine - coarse) * scale).norm(),
    }
    .police(q, "dual_point")?;
    Ok(fine * scale)
}

/// Decay exponent of `R*g` in `|t|`.
fn dual_decay(g: &SphereField) -> f64 {
    2.0 + g.equator_order
}

/// `R*g` as a cylinder field. Evaluation failures surface as NaN.
pub fn dual_transform(g: &SphereField, q: &QuadratureSpec) -> Result<CylinderField> {
    refuse_odd(g)?;
    let decay = dual_decay(g);
    let (g, q) = (g.clone(), *q);
    let label = format!("R*[{}]", g.label);
    Ok(CylinderField::new(
        label,
        move |s, t| {
            CylPoint::new(s, t)
                .and_then(|p| dual_point(&g, &p, &q))
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        },
        Parity::Even,
    )
    .vanishing(Tail::Power(decay)))
}

/// `R*g` on the product grid `s_grid × t_grid`, rows in parallel.
pub fn dual_grid(
    g: &SphereField,
    s_grid: &[f64],
    t_grid: &[f64],
    q: &QuadratureSpec,
) -> Result<CylinderSamples> {
    refuse_odd(g)?;
    let rows: Vec<Vec<Complex64>> = s_grid
        .par_iter()
        .map(|&s| {
            t_grid
                .iter()
                .map(|&t| dual_point(g, &CylPoint::new(s, t)?, q))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CylinderSamples::new(
        s_grid.to_vec(),
        t_grid.to_vec(),
        rows.into_iter().flatten().collect(),
    )
}

/// Both sides of `⟨Rf, g⟩ = ⟨f, R*g⟩`, with the area measure
/// `sin ρ dρ dθ` on the sphere and `ds dt` on the cylinder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualityReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

fn decay_of(f: &CylinderField) -> Result<f64> {
    Ok(f.decay.ok_or(Error::MissingTail)?.decay())
}

/// Evaluate both pairings. `g` is taken to be even; `f` needs a declared
/// decay (which may be negative for growing fields) and `Rf ḡ` must decay
/// fast enough towards the equator for the sphere side to converge.
pub fn duality_gap(
    f: &CylinderField,
    g: &SphereField,
    q: &QuadratureSpec,
) -> Result<DualityReport> {
    refuse_odd(g)?;
    let f_decay = decay_of(f)?;
    let k = g.equator_order;
    let n = q.n_angular.max(4);
    let nodes: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();

    // Sphere side in x = tan ρ: sin ρ dρ = x (1+x²)^{−3/2} dx, doubled for
    // the lower hemisphere.
    let lhs_decay = 2.0 + k + f_decay.min(1.0);
    if lhs_decay <= 1.0 {
        return Err(Error::Divergent(format!(
            "{} paired with {} diverges at the equator",
            f.label, g.label
        )));
    }
    let x_layout = HalfLine::new(q.r_max, q.panels(), q.tail_panels(), lhs_decay);
    let lhs_rows = nodes
        .par_iter()
        .map(|&theta| {
            let mut failure = None;
            let v: Complex64 = x_layout.integrate(|x: f64| {
                let rho = x.atan();
                let value = SphereDir::new(theta, rho)
                    .and_then(|d| Ok(forward::radon(f, &d, q)? * g.eval(theta, rho)?.conj()));
                match value {
                    Ok(v) => v * (x / (1.0 + x * x).powf(1.5)),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            });
            failure.map_or(Ok(v), Err)
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs = lhs_rows.iter().sum::<Complex64>() * (2.0 * TAU / n as f64);

    // Cylinder side over both half-lines in t.
    let rhs_decay = f_decay + dual_decay(g);
    if rhs_decay <= 1.0 {
        return Err(Error::Divergent(format!(
            "{} paired with R*[{}] diverges",
            f.label, g.label
        )));
    }
    let t_layout = HalfLine::new(q.r_max, q.panels(), q.tail_panels(), rhs_decay);
    let rhs_rows = nodes
        .par_iter()
        .map(|&s| {
            let mut failure = None;
            let v: Complex64 = t_layout.integrate(|t: f64| {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in [t, -t] {
                    match CylPoint::new(s, t).and_then(|p| dual_point(g, &p, q)) {
                        Ok(d) => acc += f.eval(s, t) * d.conj(),
                        Err(e) => {
                            failure.get_or_insert(e);
                        }
                    }
                }
                acc
            });
            failure.map_or(Ok(v), Err)
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs = rhs_rows.iter().sum::<Complex64>() * (TAU / n as f64);
    Ok(DualityReport {
        lhs,
        rhs,
        gap: (lhs - rhs).norm(),
    })
}

/// `G^#(ω) = G(arctan ω) / (1+ω²)^{3/2}` for a sphere-side profile already
/// written in `x = tan ρ`. A profile without a tail descriptor is taken to
/// be bounded, giving `G^# = O(ω^{−3})`.
pub fn g_hash(g: &RadialProfile) -> RadialProfile {
    let tail = match g.tail() {
        None => Some(Tail::Power(3.0)),
        Some(Tail::Power(p)) => Some(Tail::Power(p + 3.0)),
        other => other,
    };
    g.map(|w, v| v / (1.0 + w * w).powf(1.5), tail, g.origin())
}

fn require_side(p: &ModeProfile, side: Side, what: &str) -> Result<()> {
    if p.side != side {
        return Err(Error::InvalidParameter(format!(
            "{what} needs a {side:?} profile, got {:?}",
            p.side
        )));
    }
    Ok(())
}

/// `H_n(t)` from the sphere-side mode `G_n`.
pub fn dual_mode_forward(g_n: &ModeProfile, t: f64, q: &QuadratureSpec) -> Result<Complex64> {
    require_side(g_n, Side::Sphere, "dual_mode_forward")?;
    let m = g_n.n.unsigned_abs() as u32;
    let scale = parity_sign(g_n.n) / sqrt_pi();
    Ok(g_n.apply(|p| Ok(chebfrac::ups_minus(m, &g_hash(p), t, q)?.value))? * scale)
}

/// `H_n` as an on-demand dual-side profile. Evaluation failures surface as
/// NaN. The tail follows from `Υ₋ᵐ ω^{−p} ~ t^{1−p}`.
pub fn dual_mode_profile(g_n: &ModeProfile, q: &QuadratureSpec) -> Result<ModeProfile> {
    require_side(g_n, Side::Sphere, "dual_mode_profile")?;
    let m = g_n.n.unsigned_abs() as u32;
    let scale = parity_sign(g_n.n) / sqrt_pi();
    let q = *q;
    let part = |p: &RadialProfile| -> RadialProfile {
        if p.is_zero() {
            return RadialProfile::zero();
        }
        let hash = Arc::new(g_hash(p));
        let tail = match hash.tail() {
            Some(Tail::Power(d)) => Some(Tail::Power(d - 1.0)),
            other => other,
        };
        RadialProfile::analytic(
            move |t| {
                chebfrac::ups_minus(m, &hash, t, &q)
                    .map(|e| scale * e.value)
                    .unwrap_or(f64::NAN)
            },
            tail,
        )
    };
    Ok(ModeProfile::new(
        g_n.n,
        Side::Dual,
        part(&g_n.re),
        part(&g_n.im),
    ))
}

/// `G_n(arctan t)` from the dual-side mode `H_n`:
/// `G_n^# = Υ₋^|n|⁻¹ ((−1)^|n| √π H_n)`, then `G_n = (1+t²)^{3/2} G_n^#`.
pub fn dual_mode_invert(h_n: &ModeProfile, t: f64, q: &QuadratureSpec) -> Result<Complex64> {
    require_side(h_n, Side::Dual, "dual_mode_invert")?;
    let m = h_n.n.unsigned_abs() as u32;
    let scale = parity_sign(h_n.n) * sqrt_pi();
    let hash = h_n.apply(|p| Ok(chebfrac::invert_ups_minus(m, p, t, q)?.value))?;
    Ok(hash * scale * (1.0 + t * t).powf(1.5))
}

/// Sphere field recovered from samples of `R*g`.
#[derive(Debug, Clone)]
pub struct DualReconstruction {
    /// `g` on `θ × ρ`.
    pub grid: Grid2,
    /// Modes whose sampled amplitude fell below the relative floor.
    pub dropped: Vec<i64>,
}

/// Recover `g` on `thetas × rhos` from samples of `R*g` on `s_k = 2πk/M`
/// and nonnegative heights, by inverting each mode at `t = tan ρ`. Beyond
/// the last height the samples are continued with the decay `t^{−decay}`,
/// so the heights should reach far enough for that to hold. Modes below
/// [`MODE_FLOOR`] times the peak amplitude are dropped.
pub fn dual_reconstruct(
    samples: &CylinderSamples,
    n_max: u32,
    decay: f64,
    thetas: &[f64],
    rhos: &[f64],
    q: &QuadratureSpec,
) -> Result<DualReconstruction> {
    if let Some(r) = rhos.iter().find(|r| !(**r > 0.0 && **r < FRAC_PI_2)) {
        return Err(Error::InvalidGrid(format!(
            "polar angle {r} is outside (0, pi/2)"
        )));
    }
    let modes = fourier::analyze_samples(samples, n_max, Side::Dual, Some(Tail::Power(decay)))?;
    let heights: Vec<f64> = samples.b.iter().copied().filter(|t| *t >= 0.0).collect();
    let amplitude = |p: &ModeProfile| {
        heights
            .iter()
            .map(|&t| p.eval(t).map_or(f64::INFINITY, |v| v.norm()))
            .fold(0.0, f64::max)
    };
    let amps: Vec<(i64, f64)> = modes.iter().map(|p| (p.n, amplitude(p))).collect();
    let global = amps.iter().map(|(_, a)| *a).fold(0.0, f64::max);
    let (kept, dropped): (Vec<_>, Vec<_>) = amps
        .into_iter()
        .partition(|(_, a)| global > 0.0 && *a > MODE_FLOOR * global);
    let rows = kept
        .par_iter()
        .map(|(n, _)| {
            let p = modes.get(*n).expect("mode present");
            let row = rhos
                .iter()
                .map(|r| dual_mode_invert(p, r.tan(), q))
                .collect::<Result<Vec<_>>>()?;
            Ok((*n, row))
        })
        .collect::<Result<Vec<_>>>()?;
    let values = thetas
        .iter()
        .flat_map(|&theta| (0..rhos.len()).map(move |j| (theta, j)))
        .map(|(theta, j)| {
            rows.iter()
                .map(|(n, row)| row[j] * Complex64::from_polar(1.0, *n as f64 * theta))
                .sum()
        })
        .collect();
    Ok(DualReconstruction {
        grid: Grid2::new(thetas.to_vec(), rhos.to_vec(), values)?,
        dropped: dropped.into_iter().map(|(n, _)| n).collect(),
    })
}

/// Sphere-side mode `Σ_k c_k (1+x²)^{3/2} x^{2k−|n|}` in `x = tan ρ`,
/// annihilated by the dual mode map; see [`nullspace::rstar_generator`].
pub fn rstar_nullgen(n: i64, coeffs: &[f64]) -> Result<ModeProfile> {
    nullspace::rstar_generator(n, coeffs)
}
