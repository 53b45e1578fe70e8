//! Mode-by-mode inversion of `R`:
//!
//! ```text
//! F_n(t) = (−1)^|n| d/dt ∫_0^t G_n(arctan x) T_|n|(t/x) x / √(t²−x²) dx
//! ```
//!
//! The inner integral is evaluated after `x = t sin φ`; the derivative uses
//! a one-sided stencil so that the height-`t` value reads `G_n` only on
//! `x ≤ t`, i.e. on the polar cap `ρ ≤ arctan t`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chebfrac::cheb_t;
use crate::error::{Error, Result};
use crate::field::{CylinderSamples, Sinogram};
use crate::fourier::{analyze_sinogram, ModeSet};
use crate::profile::{parity_sign, ModeProfile, RadialProfile, ReadLog, Side};
use crate::quad::{self, derivative, Estimate, QuadratureSpec, Stencil};

/// Inner/outer integrand ratio above which the Chebyshev kernel growth near
/// `x = 0` is reported instead of integrated.
pub const SINGULARITY_RATIO: f64 = 1e6;

/// Halvings of the innermost panel towards `φ = 0`.
const GRADED_LEVELS: usize = 40;

/// Relative mode amplitude below which a sinogram mode counts as absent.
pub const MODE_FLOOR: f64 = 1e-12;

/// Outcome of [`growth_check`].
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub ok: bool,
    /// Smallest `C_n` with `|F_n(t)| ≤ C_n |t|^max(|n|−1, 0)` on the probes.
    pub constants: Vec<(i64, f64)>,
    pub violations: Vec<i64>,
}

/// Probe `|F_n(t)| / |t|^max(|n|−1,0)` at `t = ε 2^{−k/4}`, `k = 0..=80`.
/// A mode fails when the ratio keeps growing towards the origin (faster
/// than `t^{-1/4}` over the last ten octaves). Values below [`MODE_FLOOR`]
/// times the set's peak are rounding noise and count as zero.
pub fn growth_check(ms: &ModeSet, eps: f64) -> Result<GrowthReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let probes: Vec<f64> = (0..=80)
        .map(|k| eps * 2f64.powf(-(k as f64) / 4.0))
        .collect();
    let samples = ms
        .iter()
        .map(|p| {
            Ok((
                p.n,
                probes
                    .iter()
                    .map(|&t| Ok(p.eval(t)?.norm()))
                    .collect::<Result<Vec<f64>>>()?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let global = samples.iter().map(|(_, v)| peak(v)).fold(0.0, f64::max);
    let mut constants = Vec::new();
    let mut violations = Vec::new();
    for (n, values) in samples {
        let power = (n.unsigned_abs() as i32 - 1).max(0);
        let ratios: Vec<f64> = values
            .iter()
            .zip(&probes)
            .map(|(&v, t)| {
                if v <= MODE_FLOOR * global {
                    0.0
                } else {
                    v / t.powi(power)
                }
            })
            .collect();
        let sup = peak(&ratios);
        let (mid, last) = (ratios[40], ratios[80]);
        let grows =
            !sup.is_finite() || (last > 0.0 && last > mid * 2f64.powf(2.5) && last > 1e-300);
        if grows {
            violations.push(n);
        }
        constants.push((n, sup));
    }
    Ok(GrowthReport {
        ok: violations.is_empty(),
        constants,
        violations,
    })
}

/// `∫_0^τ g(x) T_n(τ/x) x/√(τ²−x²) dx` with its refinement error.
fn cap_integral(n: u32, g: &RadialProfile, tau: f64, q: &QuadratureSpec) -> Result<Estimate> {
    let split = (0.125f64).asin();
    let mut failure = None;
    let mut run = |panels: usize, track: bool| -> (f64, f64, f64) {
        let mut inner_max = 0.0f64;
        let mut outer_max = 0.0f64;
        let mut integrand = |phi: f64, inner: bool| {
            let sp = phi.sin();
            let v = match g.eval(tau * sp) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            let y = if v == 0.0 {
                0.0
            } else {
                v * cheb_t(n, 1.0 / sp) * sp
            };
            if track {
                if inner {
                    inner_max = inner_max.max(y.abs());
                } else {
                    outer_max = outer_max.max(y.abs());
                }
            }
            y
        };
        let outer: f64 =
            quad::composite(split, FRAC_PI_2, panels, |phi: f64| integrand(phi, false));
        let rule = quad::gauss_legendre(quad::PANEL_ORDER);
        let mut inner = 0.0;
        let mut hi = split;
        for _ in 0..GRADED_LEVELS {
            let lo = 0.5 * hi;
            inner += rule.integrate(lo, hi, |phi: f64| integrand(phi, true));
            hi = lo;
        }
        inner += rule.integrate(0.0, hi, |phi: f64| integrand(phi, true));
        (tau * (outer + inner), inner_max, outer_max)
    };
    let (fine, inner_max, outer_max) = run(q.panels(), true);
    let (coarse, _, _) = run((q.panels() / 2).max(1), false);
    if let Some(e) = failure {
        return Err(e);
    }
    let ratio = if outer_max > 0.0 {
        inner_max / outer_max
    } else {
        0.0
    };
    if ratio > SINGULARITY_RATIO || !fine.is_finite() {
        return Err(Error::Singularity {
            n: n as i64,
            t: tau,
            ratio,
        });
    }
    Ok(Estimate::from_pair(fine, coarse))
}

/// `F_n(t)` for one real part of a sphere-side profile in `x = tan ρ`.
pub fn mode_invert_radial(
    n: i64,
    g: &RadialProfile,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    if g.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let m = n.unsigned_abs() as u32;
    let h = q.fd_step * t.max(1.0);
    if !(t - 4.0 * h > 0.0) {
        return Err(Error::Domain {
            value: t,
            detail: format!("inversion needs t > {:e}", 4.0 * h),
        });
    }
    let mut inner_err = 0.0f64;
    let d = derivative(
        |tau| {
            let e = cap_integral(m, g, tau, q)?;
            inner_err = inner_err.max(e.error);
            Ok::<f64, Error>(e.value)
        },
        t,
        h,
        Stencil::Backward,
    )?;
    let est = Estimate {
        value: parity_sign(n) * d.value,
        error: d.error + inner_err / h,
    };
    est.police(q, "mode_invert")
}

/// `F_n(t)` from a sphere-side mode profile.
pub fn mode_invert(g_n: &ModeProfile, t: f64, q: &QuadratureSpec) -> Result<Complex64> {
    if g_n.side != Side::Sphere {
        return Err(Error::InvalidParameter(
            "mode_invert needs a sphere-side profile".into(),
        ));
    }
    g_n.apply(|p| Ok(mode_invert_radial(g_n.n, p, t, q)?.value))
}

/// Reconstructed even part of `f`: one sampled profile per retained mode.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub t_grid: Vec<f64>,
    /// `F_n(t_j)` for each retained mode.
    pub values: BTreeMap<i64, Vec<Complex64>>,
    /// Modes whose transform amplitude fell below the relative floor.
    pub dropped: Vec<i64>,
    pub n_max: u32,
}

impl Reconstruction {
    /// `f(s, t_j) = Σ F_n(t_j) e^{ins}`.
    pub fn at(&self, s: f64, j: usize) -> Complex64 {
        self.values
            .iter()
            .map(|(n, v)| v[j] * Complex64::from_polar(1.0, *n as f64 * s))
            .sum()
    }

    /// Samples on `s_grid × t_grid`.
    pub fn samples(&self, s_grid: &[f64]) -> Result<CylinderSamples> {
        let values = s_grid
            .iter()
            .flat_map(|&s| (0..self.t_grid.len()).map(move |j| (s, j)))
            .map(|(s, j)| self.at(s, j))
            .collect();
        CylinderSamples::new(s_grid.to_vec(), self.t_grid.clone(), values)
    }

    /// Spline-interpolated cylinder modes. Needs a positive increasing grid.
    pub fn modes(&self) -> Result<ModeSet> {
        let mut set = ModeSet::new(self.n_max, Side::Cylinder, true);
        for (n, v) in &self.values {
            set.insert(ModeProfile::radial_sampled(
                *n,
                Side::Cylinder,
                &self.t_grid,
                v,
                None,
            )?)?;
        }
        Ok(set)
    }
}

/// Invert a sinogram mode by mode on the given heights. Heights may be
/// negative; the even part is continued by `F_n(−t) = (−1)^|n| F_n(t)`.
pub fn reconstruct(
    sino: &Sinogram,
    n_max: u32,
    t_grid: &[f64],
    q: &QuadratureSpec,
) -> Result<Reconstruction> {
    let modes = analyze_sinogram(sino, n_max)?;
    let amplitude = |p: &ModeProfile| -> f64 {
        sino.b
            .iter()
            .filter(|r| **r < FRAC_PI_2)
            .map(|r| p.eval(r.tan()).map_or(f64::INFINITY, |v| v.norm()))
            .fold(0.0, f64::max)
    };
    let amps: Vec<(i64, f64)> = modes.iter().map(|p| (p.n, amplitude(p))).collect();
    let global = amps.iter().map(|(_, a)| *a).fold(0.0, f64::max);
    let mut dropped = Vec::new();
    let mut kept = Vec::new();
    for (n, a) in amps {
        if global == 0.0 || a <= MODE_FLOOR * global {
            dropped.push(n);
        } else {
            kept.push(modes.get(n).expect("mode present").clone());
        }
    }
    let values = kept
        .par_iter()
        .map(|p| {
            let row = t_grid
                .iter()
                .map(|&t| {
                    Ok(mode_invert(p, t.abs(), q)? * if t < 0.0 { parity_sign(p.n) } else { 1.0 })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((p.n, row))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(Reconstruction {
        t_grid: t_grid.to_vec(),
        values,
        dropped,
        n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Vanishes,
    Nonzero,
}

/// Outcome of [`support_check`].
#[derive(Debug, Clone, Serialize)]
pub struct SupportReport {
    pub verdict: Verdict,
    pub max_abs: f64,
    pub probes: Vec<f64>,
    pub reads: usize,
    pub reads_beyond_cap: usize,
}

/// Decide from the cap `ρ ≤ arctan t0` alone whether the even part of `f`
/// vanishes for `|t| ≤ t0`. Rows outside the cap are discarded before any
/// interpolation, and every profile read is checked against the cap of the
/// height being reconstructed.
pub fn support_check(
    sino: &Sinogram,
    t0: f64,
    tol: f64,
    q: &QuadratureSpec,
) -> Result<SupportReport> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t0 must be positive, got {t0}"
        )));
    }
    let cap = t0.atan() + 1e-12;
    let cols: Vec<usize> = (0..sino.b.len()).filter(|&j| sino.b[j] <= cap).collect();
    if cols.len() < 2 {
        return Err(Error::InvalidGrid(
            "fewer than two polar rows inside the cap".into(),
        ));
    }
    let values = (0..sino.a.len())
        .flat_map(|i| cols.iter().map(move |&j| (i, j)))
        .map(|(i, j)| sino.at(i, j))
        .collect();
    let rhos: Vec<f64> = cols.iter().map(|&j| sino.b[j]).collect();
    let reach = rhos.last().copied().unwrap_or(0.0).tan().min(t0);
    let capped = Sinogram::new(sino.a.clone(), rhos, values)?;
    let n_max = (((sino.a.len() - 1) / 2) as u32).min(16);
    let modes = analyze_sinogram(&capped, n_max)?;
    let probes: Vec<f64> = (1..=8).map(|k| reach * k as f64 / 8.0).collect();
    let mut max_abs = 0.0f64;
    let mut reads = 0;
    let mut beyond = 0;
    for &t in &probes {
        let mut total = 0.0;
        for p in modes.iter() {
            let log = ReadLog::new(t);
            total += mode_invert(&p.instrumented(log.clone()), t, q)?.norm();
            reads += log.reads();
            beyond += log.reads_beyond_cap();
        }
        max_abs = max_abs.max(total);
    }
    Ok(SupportReport {
        verdict: if max_abs < tol {
            Verdict::Vanishes
        } else {
            Verdict::Nonzero
        },
        max_abs,
        probes,
        reads,
        reads_beyond_cap: beyond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Tail;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn linear_mode_inverts_exactly() {
        let g = ModeProfile::real(
            1,
            Side::Sphere,
            RadialProfile::analytic(|x| -x / 4.0, Some(Tail::Power(-1.0))),
        );
        for t in [0.2, 1.0, 2.0] {
            let f = mode_invert(&g, t, &q()).unwrap();
            assert!((f.re - t / 2.0).abs() < 1e-9, "{t}: {f}");
        }
        assert_eq!(
            mode_invert(&ModeProfile::zero(3, Side::Sphere), 1.0, &q()).unwrap(),
            Complex64::default()
        );
    }

    #[test]
    fn kernel_growth_is_reported() {
        // A constant sphere mode at order 4 violates the growth condition.
        let g = ModeProfile::real(4, Side::Sphere, RadialProfile::constant(1.0));
        assert!(matches!(
            mode_invert(&g, 1.0, &q()),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn growth_constants() {
        let mut ms = ModeSet::new(2, Side::Cylinder, true);
        ms.insert(ModeProfile::real(
            1,
            Side::Cylinder,
            RadialProfile::analytic(|t| t / 2.0, None),
        ))
        .unwrap();
        ms.insert(ModeProfile::real(
            0,
            Side::Cylinder,
            RadialProfile::analytic(|t| (-t * t).exp(), None),
        ))
        .unwrap();
        let r = growth_check(&ms, 1.0).unwrap();
        assert!(r.ok);
        assert_eq!(r.constants.len(), 2);
        assert!((r.constants[0].1 - 1.0).abs() < 1e-9 && (r.constants[1].1 - 0.5).abs() < 1e-15);
        ms.insert(ModeProfile::real(
            2,
            Side::Cylinder,
            RadialProfile::constant(1.0),
        ))
        .unwrap();
        let r = growth_check(&ms, 1.0).unwrap();
        assert!(!r.ok);
        assert_eq!(r.violations, vec![2]);
    }
}
