//! Quadrature building blocks: Gauss–Legendre panels, half-line maps,
//! finite-difference derivatives and natural cubic splines.
//!
//! Everything here is deterministic; rules are cached per order.

use std::collections::{HashMap, HashSet};
use std::ops::{AddAssign, Mul};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Routines that have already warned about a refinement disagreement.
static WARNED: OnceLock<Mutex<HashSet<String>>> = OnceLock::new();

/// Order of the Gauss–Legendre rule used on every composite panel.
pub const PANEL_ORDER: usize = 16;

/// Node counts, truncation radius and tolerances shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Trapezoid nodes for periodic integrals and Gauss nodes for
    /// singular-weight integrals.
    pub n_angular: usize,
    /// Gauss nodes on each mapped tail panel of a half-line integral.
    pub n_tail: usize,
    /// Split point between the finite body and the mapped tail.
    pub r_max: f64,
    /// Refinement disagreement above which a result is flagged.
    pub tail_tol: f64,
    /// Relative step for numerical differentiation.
    pub fd_step: f64,
    /// Turn flagged refinement disagreements into errors.
    #[serde(default)]
    pub strict: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_angular: 256,
            n_tail: 32,
            r_max: 8.0,
            tail_tol: 1e-8,
            fd_step: 1e-4,
            strict: false,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_angular < 4 || self.n_tail < 4 {
            return Err(Error::InvalidParameter(format!(
                "node counts must be >= 4 (n_angular = {}, n_tail = {})",
                self.n_angular, self.n_tail
            )));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r_max must be positive, got {}",
                self.r_max
            )));
        }
        if !(self.tail_tol > 0.0 && self.fd_step > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Same spec with every node count scaled by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_angular: self.n_angular * factor,
            n_tail: self.n_tail * factor,
            ..*self
        }
    }

    /// Number of Gauss panels on a finite interval.
    pub(crate) fn panels(&self) -> usize {
        (self.n_angular / PANEL_ORDER).max(1)
    }

    pub(crate) fn tail_panels(&self) -> usize {
        (self.n_tail / PANEL_ORDER).max(1)
    }
}

/// A value together with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub(crate) fn from_pair(fine: f64, coarse: f64) -> Self {
        let floor = 8.0 * f64::EPSILON * fine.abs() + 1e-300;
        Self {
            value: fine,
            error: (fine - coarse).abs().max(floor),
        }
    }

    /// Fail when strict; otherwise warn (once per routine, then at debug
    /// level, since sampled inputs trip this on every evaluation).
    pub(crate) fn police(self, q: &QuadratureSpec, what: &str) -> Result<Self> {
        if self.error > q.tail_tol {
            if q.strict {
                return Err(Error::Convergence {
                    value: self.value,
                    estimate: self.error,
                    tol: q.tail_tol,
                });
            }
            let first = WARNED
                .get_or_init(Default::default)
                .lock()
                .map(|mut seen| seen.insert(what.to_owned()))
                .unwrap_or(false);
            let level = if first {
                log::Level::Warn
            } else {
                log::Level::Debug
            };
            log::log!(
                level,
                "{what}: refinement disagreement {:e} exceeds tail_tol {:e}",
                self.error,
                q.tail_tol
            );
        }
        Ok(self)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, pm1) = legendre_pair(n, x);
                dp = nf * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (p, pm1) = legendre_pair(n, x);
            dp = if p.is_finite() {
                nf * (x * p - pm1) / (x * x - 1.0)
            } else {
                dp
            };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate over [a, b] with a single panel.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * (w * half);
        }
        acc
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Cached rule of the given order.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(GaussLegendre::new(n));
    cache
        .write()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Composite Gauss–Legendre over `panels` equal panels of [a, b].
pub fn composite<T, F>(a: f64, b: f64, panels: usize, mut f: F) -> T
where
    T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let rule = gauss_legendre(PANEL_ORDER);
    let width = (b - a) / panels as f64;
    let mut acc = T::default();
    for k in 0..panels {
        let lo = a + width * k as f64;
        acc += rule.integrate(lo, lo + width, &mut f);
    }
    acc
}

/// Composite Gauss–Legendre over [0, b] with panels that shrink
/// geometrically towards 0 (ratio 1/2, `levels` of them) below `b * frac`.
pub fn graded_at_zero<T, F>(b: f64, frac: f64, outer_panels: usize, levels: usize, mut f: F) -> T
where
    T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let split = b * frac;
    let mut acc = composite(split, b, outer_panels, &mut f);
    let rule = gauss_legendre(PANEL_ORDER);
    let mut hi = split;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &mut f);
        hi = lo;
    }
    acc += rule.integrate(0.0, hi, &mut f);
    acc
}

/// Layout for a half-line integral `∫_0^∞ g(w) dw`: Gauss panels on
/// `[0, split]` plus the map `w = split * u^(-alpha)` on `u ∈ (0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct HalfLine {
    pub split: f64,
    pub body_panels: usize,
    pub tail_panels: usize,
    pub alpha: f64,
}

impl HalfLine {
    /// `decay` is the rate q in `|g(w)| ~ w^(-q)`; infinite for rapid decay.
    /// The map exponent makes the tail integrand vanish linearly at u = 0.
    pub fn new(split: f64, body_panels: usize, tail_panels: usize, decay: f64) -> Self {
        let alpha = if decay.is_finite() && decay > 1.0 {
            (2.0 / (decay - 1.0)).clamp(0.25, 8.0)
        } else {
            1.0
        };
        Self {
            split,
            body_panels,
            tail_panels,
            alpha,
        }
    }

    pub fn coarse(&self) -> Self {
        Self {
            body_panels: (self.body_panels / 2).max(1),
            tail_panels: (self.tail_panels / 2).max(1),
            ..*self
        }
    }

    pub fn integrate<T, F>(&self, mut g: F) -> T
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let mut acc = T::default();
        if self.split > 0.0 {
            acc += composite(0.0, self.split, self.body_panels, &mut g);
        }
        let w0 = if self.split > 0.0 { self.split } else { 1.0 };
        let alpha = self.alpha;
        acc += composite(0.0, 1.0, self.tail_panels, |u: f64| {
            let w = w0 * u.powf(-alpha);
            let jac = alpha * w / u;
            if !jac.is_finite() {
                return T::default();
            }
            g(w) * jac
        });
        acc
    }
}

/// Which side of `t` the difference stencil may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Symmetric five-point stencil.
    Central,
    /// One-sided stencil reading only abscissae `<= t`.
    Backward,
}

/// Fourth-order finite-difference derivative with one Richardson step.
/// Returns the extrapolated value and the step-halving disagreement.
pub fn derivative<F, E>(
    mut f: F,
    t: f64,
    h: f64,
    stencil: Stencil,
) -> std::result::Result<Estimate, E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
{
    let d = |f: &mut F, h: f64| -> std::result::Result<f64, E> {
        Ok(match stencil {
            Stencil::Central => {
                (f(t - 2.0 * h)? - 8.0 * f(t - h)? + 8.0 * f(t + h)? - f(t + 2.0 * h)?) / (12.0 * h)
            }
            Stencil::Backward => {
                (25.0 * f(t)? - 48.0 * f(t - h)? + 36.0 * f(t - 2.0 * h)? - 16.0 * f(t - 3.0 * h)?
                    + 3.0 * f(t - 4.0 * h)?)
                    / (12.0 * h)
            }
        })
    };
    let coarse = d(&mut f, h)?;
    let fine = d(&mut f, 0.5 * h)?;
    let value = (16.0 * fine - coarse) / 15.0;
    Ok(Estimate {
        value,
        error: (fine - coarse).abs() / 15.0 + 8.0 * f64::EPSILON * value.abs(),
    })
}

/// Natural cubic spline through strictly increasing knots; linear
/// continuation outside the knot range.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() {
            return Err(Error::InvalidGrid(format!(
                "{} abscissae vs {} values",
                n,
                ys.len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(
                "a spline needs at least two knots".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        // Tridiagonal solve for second derivatives, m[0] = m[n-1] = 0.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 0..k {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..k {
                let lower = xs[i + 1] - xs[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { xs, ys, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            let h = self.xs[1] - self.xs[0];
            let slope = (self.ys[1] - self.ys[0]) / h - h * (2.0 * self.m[0] + self.m[1]) / 6.0;
            return self.ys[0] + slope * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            let h = self.xs[n - 1] - self.xs[n - 2];
            let slope = (self.ys[n - 1] - self.ys[n - 2]) / h
                + h * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0;
            return self.ys[n - 1] + slope * (x - self.xs[n - 1]);
        }
        let i = self
            .xs
            .partition_point(|&k| k <= x)
            .saturating_sub(1)
            .min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Smallest power of two that is `>= n`.
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
