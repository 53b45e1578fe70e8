//! The parametric Radon transform on the cylinder `S¹×ℝ`, its dual, and
//! their exact mode-by-mode inverses.
//!
//! A field `f(s, t)` on the cylinder is averaged over the curves cut out by
//! planes through the origin with normal `(θ, ρ)`:
//!
//! ```text
//! Rf(θ, ρ) = (1/2π) ∫_0^{2π} f(s, −tan ρ cos(θ−s)) ds
//! ```
//!
//! On circular harmonics `R` becomes a Chebyshev fractional integral, which
//! [`chebfrac`] evaluates with singularity-removing substitutions. The
//! [`inversion`] and [`dual`] modules invert it mode by mode.
//!
//! ```
//! use cylradon::{forward, phantoms, QuadratureSpec, SphereDir};
//!
//! let q = QuadratureSpec::default();
//! let f = phantoms::from_id("const:2.5").unwrap();
//! let d = SphereDir::new(0.3, 0.8).unwrap();
//! assert!((forward::radon(&f, &d, &q).unwrap().re - 2.5).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebfrac;
pub mod checks;
pub mod dual;
pub mod error;
pub mod field;
pub mod forward;
pub mod fourier;
pub mod geometry;
pub mod inversion;
pub mod io;
pub mod nullspace;
pub mod phantoms;
pub mod profile;
pub mod quad;

pub use error::{Error, Result};
pub use field::{CylinderField, CylinderSamples, Grid2, Parity, Sinogram, SphereField};
pub use fourier::ModeSet;
pub use geometry::{CylPoint, SphereDir};
pub use profile::{ModeProfile, RadialProfile, Side, Tail};
pub use quad::{Estimate, QuadratureSpec};

/// Library version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
