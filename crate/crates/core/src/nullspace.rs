//! Null spaces of `R` and `R*` mode by mode.
//!
//! A cylinder mode `F_n(t) = Σ_{m=1}^{⌊|n|/2⌋} a_m t^{|n|−2m}` is annihilated
//! by `R`, and a sphere mode `G_n = Σ_k c_k (1+tan²ρ)^{3/2} tan^{2k−|n|} ρ`
//! by `R*`. Both spaces have dimension `⌊|n|/2⌋` for `|n| ≥ 2` and are
//! trivial otherwise.

use serde::Serialize;

use crate::chebfrac::{nullgen_minus, nullgen_plus};
use crate::dual::dual_mode_forward;
use crate::error::{Error, Result};
use crate::fourier::mode_forward;
use crate::profile::{ModeProfile, RadialProfile, Side, Tail};
use crate::quad::QuadratureSpec;

/// Dimension of either null space at mode `n`.
pub fn generator_count(n: i64) -> usize {
    let m = n.unsigned_abs();
    if m < 2 {
        0
    } else {
        (m / 2) as usize
    }
}

/// Cylinder mode `Σ_m a_m t^{|n|−2m}`; `coeffs[m−1]` is `a_m`.
pub fn r_nullgen(n: i64, coeffs: &[f64]) -> Result<ModeProfile> {
    let m = u32::try_from(n.unsigned_abs())
        .map_err(|_| Error::InvalidParameter(format!("mode {n} is too large")))?;
    let p = nullgen_plus(m, coeffs).map_err(|e| relabel(e, n))?;
    Ok(ModeProfile::real(n, Side::Cylinder, p))
}

/// Sphere mode `Σ_k c_k (1+x²)^{3/2} x^{2k−|n|}` in `x = tan ρ`;
/// `coeffs[k]` is `c_k`. Its transform to `ω` is exactly the polynomial
/// `Σ_k c_k ω^{2k−|n|}`.
pub fn rstar_generator(n: i64, coeffs: &[f64]) -> Result<ModeProfile> {
    let m = u32::try_from(n.unsigned_abs())
        .map_err(|_| Error::InvalidParameter(format!("mode {n} is too large")))?;
    let hash = nullgen_minus(m, coeffs).map_err(|e| relabel(e, n))?;
    if hash.is_zero() {
        return Ok(ModeProfile::zero(n, Side::Sphere));
    }
    let tail = match hash.tail() {
        Some(Tail::Power(p)) => Some(Tail::Power(p - 3.0)),
        other => other,
    };
    let origin = hash.origin();
    let inner = hash.clone();
    let g = RadialProfile::analytic(
        move |x| inner.eval(x).unwrap_or(f64::NAN) * (1.0 + x * x).powf(1.5),
        tail,
    )
    .with_origin(origin);
    Ok(ModeProfile::real(n, Side::Sphere, g))
}

fn relabel(e: Error, n: i64) -> Error {
    match e {
        Error::NullSpaceEmpty(_) => Error::NullSpaceEmpty(n),
        other => other,
    }
}

/// Unit coefficient vector selecting generator `j` at mode `n`.
pub fn basis_coefficients(n: i64, j: usize) -> Vec<f64> {
    let mut c = vec![0.0; generator_count(n)];
    if let Some(slot) = c.get_mut(j) {
        *slot = 1.0;
    }
    c
}

/// Annihilation residuals for one mode.
#[derive(Debug, Clone, Serialize)]
pub struct ModeNullity {
    pub n: i64,
    pub count: usize,
    /// Largest `|mode_forward|` over the forward generators and probes.
    pub forward_residual: f64,
    /// Largest `|dual_mode_forward|` over the dual generators and probes.
    pub dual_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullspaceReport {
    pub n_max: u32,
    pub probes: Vec<f64>,
    pub modes: Vec<ModeNullity>,
    pub max_residual: f64,
}

/// Residual scale: generators are normalised to unit value at the probe.
fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

/// Build every basis generator for `|n| ≤ n_max`, apply both mode maps at
/// `probes`, and record the largest residual relative to the generator's
/// size at the probe.
pub fn nullspace_report(n_max: u32, probes: &[f64], q: &QuadratureSpec) -> Result<NullspaceReport> {
    let mut modes = Vec::new();
    for n in -(n_max as i64)..=n_max as i64 {
        let count = generator_count(n);
        let mut forward_residual = 0.0f64;
        let mut dual_residual = 0.0f64;
        for j in 0..count {
            let c = basis_coefficients(n, j);
            let f = r_nullgen(n, &c)?;
            let g = rstar_generator(n, &c)?;
            for &x in probes {
                let scale_f = f.eval(x)?.norm();
                forward_residual =
                    forward_residual.max(relative(mode_forward(&f, x, q)?.norm(), scale_f));
                let scale_g = g.eval(x)?.norm() / (1.0 + x * x).powf(1.5);
                dual_residual =
                    dual_residual.max(relative(dual_mode_forward(&g, x, q)?.norm(), scale_g));
            }
        }
        modes.push(ModeNullity {
            n,
            count,
            forward_residual,
            dual_residual,
        });
    }
    let max_residual = modes
        .iter()
        .map(|m| m.forward_residual.max(m.dual_residual))
        .fold(0.0, f64::max);
    Ok(NullspaceReport {
        n_max,
        probes: probes.to_vec(),
        modes,
        max_residual,
    })
}
