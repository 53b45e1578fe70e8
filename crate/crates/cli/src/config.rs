//! JSON run configuration. Command-line flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use cylradon::field::{linspace, uniform_angles};
use cylradon::QuadratureSpec;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Phantom id generating the input field.
    pub phantom: Option<String>,
    /// CSV field used instead of a phantom.
    pub input: Option<PathBuf>,
    /// Phantom id the output is compared against.
    pub reference: Option<String>,
    pub modes: Option<u32>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    pub sphere_grid: Option<SphereGrid>,
    pub cylinder_grid: Option<CylinderGrid>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub n_angular: Option<usize>,
    pub n_tail: Option<usize>,
    pub r_max: Option<f64>,
    pub tail_tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub strict: Option<bool>,
}

impl QuadratureOverrides {
    pub fn apply(&self) -> QuadratureSpec {
        let d = QuadratureSpec::default();
        QuadratureSpec {
            n_angular: self.n_angular.unwrap_or(d.n_angular),
            n_tail: self.n_tail.unwrap_or(d.n_tail),
            r_max: self.r_max.unwrap_or(d.r_max),
            tail_tol: self.tail_tol.unwrap_or(d.tail_tol),
            fd_step: self.fd_step.unwrap_or(d.fd_step),
            strict: self.strict.unwrap_or(d.strict),
        }
    }
}

/// `n_theta` uniform azimuths times `n_rho` polar angles in `[rho_min, rho_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_rho: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl SphereGrid {
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>), Failure> {
        let ok = self.n_theta >= 1
            && self.n_rho >= 1
            && (0.0..=std::f64::consts::PI).contains(&self.rho_min)
            && (self.rho_min..=std::f64::consts::PI).contains(&self.rho_max);
        if !ok {
            return Err(Failure::usage(format!("invalid sphere grid {self:?}")));
        }
        Ok((
            uniform_angles(self.n_theta),
            linspace(self.rho_min, self.rho_max, self.n_rho),
        ))
    }
}

/// `n_s` uniform angles times `n_t` heights in `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderGrid {
    pub n_s: usize,
    pub n_t: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl CylinderGrid {
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>), Failure> {
        if self.n_s < 1
            || self.n_t < 1
            || !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min <= self.t_max)
        {
            return Err(Failure::usage(format!("invalid cylinder grid {self:?}")));
        }
        Ok((
            uniform_angles(self.n_s),
            linspace(self.t_min, self.t_max, self.n_t),
        ))
    }
}

pub fn load(path: &Path) -> Result<Config, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
}
