//! Circular-harmonic analysis and synthesis on the cylinder and the sphere,
//! and the mode-level forward map
//! `G_n(arctan x) = ((−1)^|n| / √π) Υ₊^|n| F_n(x)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chebfrac::{self, sqrt_pi};
use crate::error::{Error, Result};
use crate::field::{
    is_uniform_circle, CylinderField, CylinderSamples, Parity, Sinogram, SphereField,
};
use crate::forward::radon_point;
use crate::geometry::SphereDir;
use crate::profile::{parity_sign, ModeProfile, RadialProfile, Side, Tail};
use crate::quad::{next_pow2, QuadratureSpec};

/// Circular-harmonic profiles for `n ∈ [−N, N]`, all on the same side.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub n_max: u32,
    pub side: Side,
    /// Profiles satisfy `F_n(−x) = (−1)^|n| F_n(x)`.
    pub even: bool,
    profiles: BTreeMap<i64, ModeProfile>,
}

impl ModeSet {
    pub fn new(n_max: u32, side: Side, even: bool) -> Self {
        Self {
            n_max,
            side,
            even,
            profiles: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, profile: ModeProfile) -> Result<()> {
        if profile.n.unsigned_abs() > self.n_max as u64 {
            return Err(Error::InvalidParameter(format!(
                "mode {} exceeds the band limit {}",
                profile.n, self.n_max
            )));
        }
        if profile.side != self.side {
            return Err(Error::InvalidParameter(
                "mode profile belongs to a different side".into(),
            ));
        }
        self.profiles.insert(profile.n, profile);
        Ok(())
    }

    pub fn get(&self, n: i64) -> Option<&ModeProfile> {
        self.profiles.get(&n)
    }

    pub fn remove(&mut self, n: i64) -> Option<ModeProfile> {
        self.profiles.remove(&n)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeProfile> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Angular nodes for analysing up to frequency `n_max`: a power of two, at
/// least `4 n_max` and at least `n_angular` unless the field's band is known.
pub fn angular_nodes(n_max: u32, band: Option<u32>, q: &QuadratureSpec) -> usize {
    let floor = match band {
        Some(b) => 4 * b as usize + 4,
        None => q.n_angular,
    };
    next_pow2((4 * n_max as usize).max(floor).max(8))
}

/// `e^{−2πi nk/M}` with the phase reduced exactly modulo `M`.
fn unit_phase(n: i64, k: usize, m: usize) -> Complex64 {
    let idx = (k as i64 * n).rem_euclid(m as i64) as f64;
    Complex64::from_polar(1.0, -TAU * idx / m as f64)
}

/// Kernel table `e^{−i n φ_k}` for `n ∈ [−N, N]` and `φ_k = 2πk/M`.
struct Dft {
    n_max: i64,
    m: usize,
    table: Vec<Complex64>,
}

impl Dft {
    fn new(n_max: u32, m: usize) -> Self {
        let n_max = n_max as i64;
        let mut table = Vec::with_capacity((2 * n_max as usize + 1) * m);
        for n in -n_max..=n_max {
            table.extend((0..m).map(|k| unit_phase(n, k, m)));
        }
        Self { n_max, m, table }
    }

    fn coefficient(&self, n: i64, samples: &[Complex64]) -> Complex64 {
        let row = &self.table[((n + self.n_max) as usize) * self.m..][..self.m];
        samples
            .iter()
            .zip(row)
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            / self.m as f64
    }
}

/// Angular Fourier coefficients of equispaced samples, `n ∈ [−N, N]`.
pub fn angular_coefficients(samples: &[Complex64], n_max: u32) -> Vec<Complex64> {
    let dft = Dft::new(n_max, samples.len());
    (-(n_max as i64)..=n_max as i64)
        .map(|n| dft.coefficient(n, samples))
        .collect()
}

fn check_radial_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "{what} grid needs at least two nodes"
        )));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(format!(
            "{what} grid must be nonnegative and strictly increasing"
        )));
    }
    Ok(())
}

/// `F_n(t) = (1/2π) ∫ f(s, t) e^{−ins} ds` on a nonnegative `t` grid,
/// interpolated by natural splines.
pub fn analyze_cyl(
    f: &CylinderField,
    n_max: u32,
    t_grid: &[f64],
    q: &QuadratureSpec,
) -> Result<ModeSet> {
    check_radial_grid(t_grid, "height")?;
    let m = angular_nodes(n_max, f.band, q);
    let dft = Dft::new(n_max, m);
    let coeffs: Vec<Vec<Complex64>> = t_grid
        .par_iter()
        .map(|&t| {
            let samples: Vec<Complex64> = (0..m)
                .map(|k| f.eval(TAU * k as f64 / m as f64, t))
                .collect();
            (-(n_max as i64)..=n_max as i64)
                .map(|n| dft.coefficient(n, &samples))
                .collect()
        })
        .collect();
    let even = f.parity == Parity::Even;
    let mut set = ModeSet::new(n_max, Side::Cylinder, even);
    for (idx, n) in (-(n_max as i64)..=n_max as i64).enumerate() {
        let values: Vec<Complex64> = coeffs.iter().map(|row| row[idx]).collect();
        let profile = if even {
            ModeProfile::radial_sampled(n, Side::Cylinder, t_grid, &values, None)?
        } else {
            let part = |pick: fn(&Complex64) -> f64| {
                let ys: Vec<f64> = values.iter().map(pick).collect();
                RadialProfile::sampled(t_grid, &ys, None, None)
            };
            ModeProfile::new(n, Side::Cylinder, part(|v| v.re)?, part(|v| v.im)?)
        };
        set.insert(profile)?;
    }
    Ok(set)
}

/// Modes of a sampled sphere field on `ρ ∈ [0, π/2)`.
pub fn analyze_sph(
    g: &SphereField,
    n_max: u32,
    rho_grid: &[f64],
    q: &QuadratureSpec,
) -> Result<ModeSet> {
    check_radial_grid(rho_grid, "polar")?;
    let m = angular_nodes(n_max, None, q);
    let dft = Dft::new(n_max, m);
    let coeffs: Vec<Vec<Complex64>> = rho_grid
        .par_iter()
        .map(|&rho| {
            let samples = (0..m)
                .map(|k| g.eval(TAU * k as f64 / m as f64, rho))
                .collect::<Result<Vec<_>>>()?;
            Ok((-(n_max as i64)..=n_max as i64)
                .map(|n| dft.coefficient(n, &samples))
                .collect())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    modes_from_rows(n_max, rho_grid, &coeffs, g.parity == Parity::Even)
}

fn modes_from_rows(
    n_max: u32,
    rhos: &[f64],
    coeffs: &[Vec<Complex64>],
    even: bool,
) -> Result<ModeSet> {
    let mut set = ModeSet::new(n_max, Side::Sphere, even);
    for (idx, n) in (-(n_max as i64)..=n_max as i64).enumerate() {
        let values: Vec<Complex64> = coeffs.iter().map(|row| row[idx]).collect();
        set.insert(ModeProfile::sphere_sampled(n, rhos, &values)?)?;
    }
    Ok(set)
}

/// Modes of a sinogram whose θ nodes are `2πk/M`. Rows with `ρ ≥ π/2` are
/// ignored; the transform is even so the upper hemisphere carries all of it.
pub fn analyze_sinogram(sino: &Sinogram, n_max: u32) -> Result<ModeSet> {
    if !is_uniform_circle(&sino.a) {
        return Err(Error::InvalidGrid("theta nodes must be 2*pi*k/M".into()));
    }
    if sino.a.len() <= 2 * n_max as usize {
        return Err(Error::InvalidGrid(format!(
            "{} theta nodes cannot resolve modes up to {n_max}",
            sino.a.len()
        )));
    }
    let cols: Vec<usize> = (0..sino.b.len())
        .filter(|&j| sino.b[j] < std::f64::consts::FRAC_PI_2 - 1e-12)
        .collect();
    let rhos: Vec<f64> = cols.iter().map(|&j| sino.b[j]).collect();
    check_radial_grid(&rhos, "polar")?;
    let dft = Dft::new(n_max, sino.a.len());
    let coeffs: Vec<Vec<Complex64>> = cols
        .iter()
        .map(|&j| {
            let samples = sino.column(j);
            (-(n_max as i64)..=n_max as i64)
                .map(|n| dft.coefficient(n, &samples))
                .collect()
        })
        .collect();
    modes_from_rows(n_max, &rhos, &coeffs, true)
}

/// Modes of an even field sampled on `s_k = 2πk/M` and a height grid.
/// Only the nonnegative heights are used; the rest follows by parity.
/// `side` is `Cylinder` for `f` itself and `Dual` for samples of `R*g`.
pub fn analyze_samples(
    samples: &CylinderSamples,
    n_max: u32,
    side: Side,
    tail: Option<Tail>,
) -> Result<ModeSet> {
    if side == Side::Sphere {
        return Err(Error::InvalidParameter(
            "height samples cannot carry sphere modes".into(),
        ));
    }
    if !is_uniform_circle(&samples.a) {
        return Err(Error::InvalidGrid("s nodes must be 2*pi*k/M".into()));
    }
    if samples.a.len() <= 2 * n_max as usize {
        return Err(Error::InvalidGrid(format!(
            "{} s nodes cannot resolve modes up to {n_max}",
            samples.a.len()
        )));
    }
    let cols: Vec<usize> = (0..samples.b.len())
        .filter(|&j| samples.b[j] >= 0.0)
        .collect();
    let ts: Vec<f64> = cols.iter().map(|&j| samples.b[j]).collect();
    check_radial_grid(&ts, "height")?;
    let dft = Dft::new(n_max, samples.a.len());
    let coeffs: Vec<Vec<Complex64>> = cols
        .iter()
        .map(|&j| {
            let column = samples.column(j);
            (-(n_max as i64)..=n_max as i64)
                .map(|n| dft.coefficient(n, &column))
                .collect()
        })
        .collect();
    let mut set = ModeSet::new(n_max, side, true);
    for (idx, n) in (-(n_max as i64)..=n_max as i64).enumerate() {
        let values: Vec<Complex64> = coeffs.iter().map(|row| row[idx]).collect();
        set.insert(ModeProfile::radial_sampled(n, side, &ts, &values, tail)?)?;
    }
    Ok(set)
}

/// `F_n` of a cylinder field, computed on demand at each height by an
/// `M`-point angular sum.
pub fn cylinder_mode(f: &CylinderField, n: i64, q: &QuadratureSpec) -> ModeProfile {
    let m = angular_nodes(n.unsigned_abs() as u32, f.band, q);
    let kernel: Arc<Vec<Complex64>> = Arc::new((0..m).map(|k| unit_phase(n, k, m)).collect());
    let coefficient = {
        let f = f.clone();
        move |t: f64| -> Complex64 {
            (0..m)
                .map(|k| f.eval(TAU * k as f64 / m as f64, t) * kernel[k])
                .sum::<Complex64>()
                / m as f64
        }
    };
    let coefficient = Arc::new(coefficient);
    let (a, b) = (coefficient.clone(), coefficient);
    let tail = f.decay;
    ModeProfile::new(
        n,
        Side::Cylinder,
        RadialProfile::analytic(move |t| a(t).re, tail),
        RadialProfile::analytic(move |t| b(t).im, tail),
    )
}

/// `G_n` of a sphere field as a function of `x = tan ρ`, computed on demand.
/// The field's equator order becomes the tail rate. Evaluation failures
/// surface as NaN.
pub fn sphere_mode(g: &SphereField, n: i64, q: &QuadratureSpec) -> ModeProfile {
    let m = angular_nodes(n.unsigned_abs() as u32, None, q);
    let coefficient = {
        let g = g.clone();
        Arc::new(move |x: f64| -> Complex64 {
            let rho = x.atan();
            (0..m)
                .map(|k| {
                    let theta = TAU * k as f64 / m as f64;
                    g.eval(theta, rho)
                        .map_or(Complex64::new(f64::NAN, f64::NAN), |v| {
                            v * unit_phase(n, k, m)
                        })
                })
                .sum::<Complex64>()
                / m as f64
        })
    };
    let (a, b) = (coefficient.clone(), coefficient);
    let tail = (g.equator_order > 0.0).then_some(Tail::Power(g.equator_order));
    ModeProfile::new(
        n,
        Side::Sphere,
        RadialProfile::analytic(move |x| a(x).re, tail),
        RadialProfile::analytic(move |x| b(x).im, tail),
    )
}

/// `Σ_n P_n(x) e^{i n angle}`. Negative `x` on an even cylinder set uses
/// `P_n(−x) = (−1)^|n| P_n(x)`.
pub fn synthesize(ms: &ModeSet, angle: f64, x: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in ms.iter() {
        let value = if x < 0.0 && ms.even {
            p.eval(-x)? * parity_sign(p.n)
        } else {
            p.eval(x)?
        };
        acc += value * Complex64::from_polar(1.0, p.n as f64 * angle);
    }
    Ok(acc)
}

/// `G_n(arctan x) = ((−1)^|n| / √π) Υ₊^|n| F_n(x)`.
pub fn mode_forward(f_n: &ModeProfile, x: f64, q: &QuadratureSpec) -> Result<Complex64> {
    let m = f_n.n.unsigned_abs() as u32;
    let scale = parity_sign(f_n.n) / sqrt_pi();
    Ok(f_n.apply(|p| Ok(chebfrac::ups_plus(m, p, x, q)?.value))? * scale)
}

/// Largest disagreement, per mode, between the angular analysis of `Rf`
/// and the mode-level forward map applied to the analysis of `f`.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub per_mode: Vec<(i64, f64)>,
    pub max_discrepancy: f64,
}

pub fn mode_consistency(
    f: &CylinderField,
    n_max: u32,
    rhos: &[f64],
    q: &QuadratureSpec,
) -> Result<ConsistencyReport> {
    if rhos
        .iter()
        .any(|r| !(*r > 0.0 && *r < std::f64::consts::FRAC_PI_2))
    {
        return Err(Error::InvalidGrid(
            "consistency probes need rho in (0, pi/2)".into(),
        ));
    }
    let m = angular_nodes(n_max, f.band, q);
    let dft = Dft::new(n_max, m);
    let sphere_rows: Vec<Vec<Complex64>> = rhos
        .par_iter()
        .map(|&rho| {
            let samples = (0..m)
                .map(|k| radon_point(f, &SphereDir::new(TAU * k as f64 / m as f64, rho)?, q))
                .collect::<Result<Vec<_>>>()?;
            Ok((-(n_max as i64)..=n_max as i64)
                .map(|n| dft.coefficient(n, &samples))
                .collect())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    let per_mode = (-(n_max as i64)..=n_max as i64)
        .into_par_iter()
        .map(|n| {
            let f_n = cylinder_mode(f, n, q);
            let idx = (n + n_max as i64) as usize;
            let mut worst = 0.0f64;
            for (j, &rho) in rhos.iter().enumerate() {
                let radial = mode_forward(&f_n, rho.tan(), q)?;
                worst = worst.max((radial - sphere_rows[j][idx]).norm());
            }
            Ok((n, worst))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = per_mode.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    Ok(ConsistencyReport {
        per_mode,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::linspace;
    use crate::profile::Tail;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn analysis_of_band_limited_fields() {
        let f = CylinderField::real("g2", |s, t| (-t * t).exp() * (2.0 * s).cos(), Parity::Even)
            .vanishing(Tail::Rapid);
        let ts = linspace(0.0, 3.0, 61);
        let ms = analyze_cyl(&f, 4, &ts, &q()).unwrap();
        for n in -4..=4i64 {
            let want = if n.abs() == 2 {
                (-1.0f64).exp() / 2.0
            } else {
                0.0
            };
            assert!(
                (ms.get(n).unwrap().eval(1.0).unwrap().re - want).abs() < 1e-6,
                "n={n}"
            );
        }
        let v = synthesize(&ms, 0.4, -1.3).unwrap();
        assert!((v.re - (-1.69f64).exp() * 0.8f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn cosine_height_modes() {
        let f = CylinderField::real("tcos", |s, t| t * s.cos(), Parity::Even);
        let f1 = cylinder_mode(&f, 1, &q());
        assert!((f1.eval(0.8).unwrap().re - 0.4).abs() < 1e-15);
        for x in [0.5, 1.0, 2.0] {
            let g = mode_forward(&f1, x, &q()).unwrap().re;
            assert!((g + x / 4.0).abs() < 1e-13, "{x}: {g}");
        }
    }

    #[test]
    fn constant_sphere_field_has_one_mode() {
        let g = SphereField::constant(1.0);
        let ms = analyze_sph(&g, 3, &linspace(0.0, 1.2, 13), &q()).unwrap();
        assert!((ms.get(0).unwrap().eval(0.5).unwrap().re - 1.0).abs() < 1e-12);
        assert!(ms.get(2).unwrap().eval(0.5).unwrap().norm() < 1e-12);
    }

    #[test]
    fn sinogram_analysis_requires_uniform_theta() {
        let sino = Sinogram::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.5],
            vec![Complex64::default(); 6],
        )
        .unwrap();
        assert!(analyze_sinogram(&sino, 1).is_err());
    }
}
