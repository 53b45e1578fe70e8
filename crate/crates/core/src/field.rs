//! Fields on the cylinder and on the sphere, and sampled grids of them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Tail;

type CylRule = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;
type BoundaryRule = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type SphRule = Arc<dyn Fn(f64, f64) -> Result<Complex64> + Send + Sync>;

/// Symmetry under the antipodal maps `(s, t) ↦ (s+π, −t)` on the cylinder
/// and `(θ, ρ) ↦ (θ+π, π−ρ)` on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
    Unknown,
}

/// Behaviour of a cylinder field as `t → +∞`.
#[derive(Clone)]
pub enum Boundary {
    /// Tends to zero.
    Vanishing,
    /// Tends to the 2π-periodic function `C(s)`.
    Limit(BoundaryRule),
    /// Not known, or no limit exists.
    Unknown,
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Vanishing => write!(f, "Vanishing"),
            Boundary::Limit(_) => write!(f, "Limit(..)"),
            Boundary::Unknown => write!(f, "Unknown"),
        }
    }
}

/// A complex function on `S¹×ℝ`, given as a rule in `(s, t)`.
#[derive(Clone)]
pub struct CylinderField {
    rule: CylRule,
    pub parity: Parity,
    pub boundary: Boundary,
    /// Power law of `|f(s, t)|` as `|t| → ∞` (negative exponents mean
    /// growth); `None` when unknown.
    pub decay: Option<Tail>,
    /// Known sup-norm bound.
    pub bound: Option<f64>,
    /// Largest angular frequency present, when band limited.
    pub band: Option<u32>,
    pub label: String,
}

impl fmt::Debug for CylinderField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderField")
            .field("label", &self.label)
            .field("parity", &self.parity)
            .field("boundary", &self.boundary)
            .field("decay", &self.decay)
            .field("bound", &self.bound)
            .field("band", &self.band)
            .finish()
    }
}

impl CylinderField {
    pub fn new<F>(label: impl Into<String>, rule: F, parity: Parity) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            rule: Arc::new(rule),
            parity,
            boundary: Boundary::Unknown,
            decay: None,
            bound: None,
            band: None,
            label: label.into(),
        }
    }

    pub fn real<F>(label: impl Into<String>, rule: F, parity: Parity) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, move |s, t| Complex64::new(rule(s, t), 0.0), parity)
    }

    pub fn zero() -> Self {
        Self::new("zero", |_, _| Complex64::new(0.0, 0.0), Parity::Even)
            .vanishing(Tail::Zero)
            .with_bound(0.0)
            .with_band(0)
    }

    /// Declare decay to zero at the given rate.
    pub fn vanishing(mut self, decay: Tail) -> Self {
        self.boundary = Boundary::Vanishing;
        self.decay = Some(decay);
        self
    }

    pub fn with_limit<C>(mut self, limit: C) -> Self
    where
        C: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.boundary = Boundary::Limit(Arc::new(limit));
        self
    }

    pub fn with_decay(mut self, decay: Tail) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_band(mut self, band: u32) -> Self {
        self.band = Some(band);
        self
    }

    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        (self.rule)(s, t)
    }

    /// `α f + β g`. Declarations survive only where both operands agree.
    pub fn combine(&self, alpha: Complex64, other: &CylinderField, beta: Complex64) -> Self {
        let (a, b) = (self.rule.clone(), other.rule.clone());
        let parity = if self.parity == other.parity {
            self.parity
        } else {
            Parity::Mixed
        };
        let boundary = match (&self.boundary, &other.boundary) {
            (Boundary::Vanishing, Boundary::Vanishing) => Boundary::Vanishing,
            (Boundary::Unknown, _) | (_, Boundary::Unknown) => Boundary::Unknown,
            (x, y) => {
                let lim = |bd: &Boundary| -> BoundaryRule {
                    match bd {
                        Boundary::Limit(c) => c.clone(),
                        _ => Arc::new(|_| Complex64::new(0.0, 0.0)),
                    }
                };
                let (cx, cy) = (lim(x), lim(y));
                Boundary::Limit(Arc::new(move |s| alpha * cx(s) + beta * cy(s)))
            }
        };
        let decay = match (self.decay, other.decay) {
            (Some(x), Some(y)) => Some(Tail::Power(x.decay().min(y.decay()))).map(|t| match t {
                Tail::Power(p) if p.is_infinite() => Tail::Rapid,
                other => other,
            }),
            _ => None,
        };
        Self {
            rule: Arc::new(move |s, t| alpha * a(s, t) + beta * b(s, t)),
            parity,
            boundary,
            decay,
            bound: match (self.bound, other.bound) {
                (Some(x), Some(y)) => Some(alpha.norm() * x + beta.norm() * y),
                _ => None,
            },
            band: match (self.band, other.band) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
            label: format!("{}+{}", self.label, other.label),
        }
    }
}

/// A complex function on the sphere in `(θ, ρ)` coordinates. Evaluation may
/// fail, for instance on the equator.
#[derive(Clone)]
pub struct SphereField {
    rule: SphRule,
    pub parity: Parity,
    /// Order `k` of vanishing at the equator, `|g| ~ |cos ρ|^k`; 0 for
    /// fields that are merely bounded there.
    pub equator_order: f64,
    pub label: String,
}

impl fmt::Debug for SphereField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereField")
            .field("label", &self.label)
            .field("parity", &self.parity)
            .field("equator_order", &self.equator_order)
            .finish()
    }
}

impl SphereField {
    pub fn new<F>(label: impl Into<String>, rule: F, parity: Parity) -> Self
    where
        F: Fn(f64, f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            rule: Arc::new(rule),
            parity,
            equator_order: 0.0,
            label: label.into(),
        }
    }

    pub fn real<F>(label: impl Into<String>, rule: F, parity: Parity) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            label,
            move |th, rho| Ok(Complex64::new(rule(th, rho), 0.0)),
            parity,
        )
    }

    pub fn with_equator_order(mut self, k: f64) -> Self {
        self.equator_order = k;
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::real(format!("const-sphere:{c}"), move |_, _| c, Parity::Even)
    }

    pub fn eval(&self, theta: f64, rho: f64) -> Result<Complex64> {
        (self.rule)(theta, rho)
    }
}

/// Samples on a product grid. `values[i * b.len() + j]` belongs to
/// `(a[i], b[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Grid2 {
    pub fn new(a: Vec<f64>, b: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != a.len() * b.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                a.len(),
                b.len()
            )));
        }
        Ok(Self { a, b, values })
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.b.len() + j]
    }

    /// Column `j` across all `a` nodes.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.a.len()).map(|i| self.at(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Transform samples: `a` holds θ nodes, `b` holds ρ nodes.
pub type Sinogram = Grid2;

/// Cylinder samples: `a` holds s nodes, `b` holds t nodes.
pub type CylinderSamples = Grid2;

/// `n` equispaced angles `2πk/n`, `k = 0..n`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
        .collect()
}

/// `n` equispaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Whether `xs` are the nodes `2πk/n` in order, to rounding.
pub fn is_uniform_circle(xs: &[f64]) -> bool {
    let n = xs.len();
    n > 0
        && xs
            .iter()
            .enumerate()
            .all(|(k, x)| (x - std::f64::consts::TAU * k as f64 / n as f64).abs() < 1e-9)
}
