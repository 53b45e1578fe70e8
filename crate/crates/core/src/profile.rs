//! Radial profiles: real functions on `[0, ∞)` with the coverage, tail and
//! origin descriptors the singular integrals need, plus complex mode
//! profiles built from them.

use std::fmt;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::CubicSpline;

/// Relative slack when comparing an argument against the coverage radius,
/// so that `tan(atan(x))` rounding does not fall outside.
const COVERAGE_SLACK: f64 = 1e-12;

/// Smallest `sin^k ρ` a sphere-mode sample is divided by.
pub const DIVISION_FLOOR: f64 = 1e-6;

type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Behaviour of a profile beyond its covered range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Identically zero beyond the coverage radius.
    Zero,
    /// Faster than any power; sampled bodies are treated as zero beyond coverage.
    Rapid,
    /// `|f(r)| ~ r^(-p)`; negative `p` means growth. Sampled bodies are
    /// continued by `f(R) (R/r)^p`.
    Power(f64),
}

impl Tail {
    /// Decay exponent, infinite for zero and rapid tails.
    pub fn decay(&self) -> f64 {
        match self {
            Tail::Zero | Tail::Rapid => f64::INFINITY,
            Tail::Power(p) => *p,
        }
    }
}

/// One term `coeff · r^power` of an exact polynomial descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub power: i32,
}

/// A real function of a nonnegative variable.
#[derive(Clone)]
pub struct RadialProfile {
    rule: Rule,
    coverage: f64,
    tail: Option<Tail>,
    origin: f64,
    zero: bool,
    terms: Option<Arc<[Monomial]>>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("coverage", &self.coverage)
            .field("tail", &self.tail)
            .field("origin", &self.origin)
            .field("zero", &self.zero)
            .field("terms", &self.terms)
            .finish()
    }
}

impl RadialProfile {
    /// A closed-form profile valid on all of `[0, ∞)`.
    pub fn analytic<F>(rule: F, tail: Option<Tail>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            rule: Arc::new(rule),
            coverage: f64::INFINITY,
            tail,
            origin: 0.0,
            zero: false,
            terms: None,
        }
    }

    /// A rule that is only trusted on `[0, coverage]`.
    pub fn covered<F>(rule: F, coverage: f64, tail: Option<Tail>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            coverage,
            ..Self::analytic(rule, tail)
        }
    }

    pub fn zero() -> Self {
        Self {
            zero: true,
            ..Self::analytic(|_| 0.0, Some(Tail::Zero))
        }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self::polynomial(vec![Monomial { coeff: c, power: 0 }])
    }

    /// Exact sum of monomials. Tail and origin descriptors follow from the
    /// largest and smallest exponents.
    pub fn polynomial(terms: Vec<Monomial>) -> Self {
        let terms: Vec<Monomial> = terms.into_iter().filter(|m| m.coeff != 0.0).collect();
        if terms.is_empty() {
            return Self::zero();
        }
        let top = terms.iter().map(|m| m.power).max().unwrap_or(0);
        let bottom = terms.iter().map(|m| m.power).min().unwrap_or(0);
        let shared: Arc<[Monomial]> = terms.into();
        let eval_terms = shared.clone();
        Self {
            rule: Arc::new(move |r: f64| {
                eval_terms.iter().map(|m| m.coeff * r.powi(m.power)).sum()
            }),
            coverage: f64::INFINITY,
            tail: Some(Tail::Power(-(top as f64))),
            origin: bottom as f64,
            zero: false,
            terms: Some(shared),
        }
    }

    /// Natural cubic spline through samples on `[0, R]`. When `parity` is
    /// given the samples are mirrored about 0 with that sign, so the spline
    /// sees the function's true behaviour at the origin.
    pub fn sampled(
        xs: &[f64],
        ys: &[f64],
        parity: Option<f64>,
        tail: Option<Tail>,
    ) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidGrid(format!(
                "{} abscissae vs {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.first().is_some_and(|&x| x < 0.0) {
            return Err(Error::InvalidGrid(
                "radial abscissae must be nonnegative".into(),
            ));
        }
        let coverage = *xs
            .last()
            .ok_or_else(|| Error::InvalidGrid("empty grid".into()))?;
        let (gx, gy) = match parity {
            Some(sign) => {
                let skip = usize::from(xs[0] == 0.0);
                let mut gx: Vec<f64> = xs[skip..].iter().rev().map(|x| -x).collect();
                let mut gy: Vec<f64> = ys[skip..].iter().rev().map(|y| sign * y).collect();
                gx.extend_from_slice(xs);
                gy.extend_from_slice(ys);
                (gx, gy)
            }
            None => (xs.to_vec(), ys.to_vec()),
        };
        let spline = CubicSpline::natural(gx, gy)?;
        Ok(Self::covered(move |x| spline.eval(x), coverage, tail))
    }

    pub fn with_origin(mut self, exponent: f64) -> Self {
        self.origin = exponent;
        self
    }

    pub fn with_tail(mut self, tail: Option<Tail>) -> Self {
        self.tail = tail;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn tail(&self) -> Option<Tail> {
        self.tail
    }

    /// Exponent `a` with `f(r) ~ r^a` as `r → 0`.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn terms(&self) -> Option<&[Monomial]> {
        self.terms.as_deref()
    }

    /// Value at `r`, continuing beyond coverage by the tail descriptor.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if self.zero {
            return Ok(0.0);
        }
        if r <= self.coverage * (1.0 + COVERAGE_SLACK) {
            return Ok((self.rule)(r));
        }
        match self.tail {
            Some(Tail::Zero) | Some(Tail::Rapid) => Ok(0.0),
            Some(Tail::Power(p)) => Ok((self.rule)(self.coverage) * (self.coverage / r).powf(p)),
            None => Err(Error::Domain {
                value: r,
                detail: format!("profile covers [0, {}] and has no tail", self.coverage),
            }),
        }
    }

    /// Value inside the covered range, without error plumbing.
    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        if self.zero {
            0.0
        } else {
            self.eval(r).unwrap_or(f64::NAN)
        }
    }

    /// `r ↦ f(r) · h(r)` with the given descriptors.
    pub fn map<F>(&self, h: F, tail: Option<Tail>, origin: f64) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if self.zero {
            return Self::zero();
        }
        let inner = self.clone();
        let coverage = inner.coverage;
        Self {
            rule: Arc::new(move |r| h(r, inner.eval_unchecked(r))),
            coverage,
            tail,
            origin,
            zero: false,
            terms: None,
        }
    }

    fn wrap(&self, log: Arc<ReadLog>) -> Self {
        let inner = self.rule.clone();
        Self {
            rule: Arc::new(move |r| {
                log.record(r);
                inner(r)
            }),
            ..self.clone()
        }
    }
}

/// Counts accesses to a profile and flags those beyond a cap.
#[derive(Debug)]
pub struct ReadLog {
    cap: f64,
    reads: AtomicUsize,
    beyond_cap: AtomicUsize,
    max_arg: AtomicU64,
}

impl ReadLog {
    pub fn new(cap: f64) -> Arc<Self> {
        Arc::new(Self {
            cap,
            reads: AtomicUsize::new(0),
            beyond_cap: AtomicUsize::new(0),
            max_arg: AtomicU64::new(0f64.to_bits()),
        })
    }

    fn record(&self, r: f64) {
        self.reads.fetch_add(1, Ordering::Relaxed);
        if r > self.cap {
            self.beyond_cap.fetch_add(1, Ordering::Relaxed);
        }
        let mut current = self.max_arg.load(Ordering::Relaxed);
        while f64::from_bits(current) < r {
            match self.max_arg.compare_exchange_weak(
                current,
                r.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => break,
                Err(seen) => current = seen,
            }
        }
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn reads_beyond_cap(&self) -> usize {
        self.beyond_cap.load(Ordering::Relaxed)
    }

    pub fn max_argument(&self) -> f64 {
        f64::from_bits(self.max_arg.load(Ordering::Relaxed))
    }
}

/// Which function a mode profile belongs to, and hence its variable:
/// `t` for cylinder and dual modes, `x = tan ρ` for sphere modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Cylinder,
    Sphere,
    Dual,
}

/// One circular-harmonic coefficient profile, complex valued.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub n: i64,
    pub side: Side,
    pub re: RadialProfile,
    pub im: RadialProfile,
}

impl ModeProfile {
    pub fn new(n: i64, side: Side, re: RadialProfile, im: RadialProfile) -> Self {
        Self { n, side, re, im }
    }

    pub fn real(n: i64, side: Side, re: RadialProfile) -> Self {
        Self::new(n, side, re, RadialProfile::zero())
    }

    pub fn zero(n: i64, side: Side) -> Self {
        Self::real(n, side, RadialProfile::zero())
    }

    /// Sphere-side mode from a closed-form rule in ρ on `[0, π/2)`.
    /// `growth` is the exponent `a` in `|G(ρ)| ~ tan^a ρ` near the equator.
    pub fn sphere_analytic<F>(n: i64, rule: F, growth: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::real(
            n,
            Side::Sphere,
            RadialProfile::analytic(move |x: f64| rule(x.atan()), Some(Tail::Power(-growth))),
        )
    }

    /// Sphere-side mode from complex samples on an increasing ρ grid inside
    /// `[0, π/2)`. The factor `sin^k ρ`, `k = max(|n|−1, 0)`, is divided out
    /// before interpolation and restored afterwards.
    pub fn sphere_sampled(n: i64, rhos: &[f64], values: &[Complex64]) -> Result<Self> {
        if rhos.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} rho nodes vs {} values",
                rhos.len(),
                values.len()
            )));
        }
        if rhos
            .iter()
            .any(|r| !(0.0..std::f64::consts::FRAC_PI_2).contains(r))
        {
            return Err(Error::InvalidGrid(
                "sphere mode samples must lie in [0, pi/2)".into(),
            ));
        }
        let k = (n.unsigned_abs() as i32 - 1).max(0);
        // Leading rows where the division would magnify rounding noise are
        // left to the mirrored spline; at least four rows are kept.
        let skip = if k > 0 {
            let small = rhos
                .iter()
                .take_while(|r| r.sin().powi(k) < DIVISION_FLOOR)
                .count();
            small
                .min(rhos.len().saturating_sub(4))
                .max(usize::from(rhos.first() == Some(&0.0)))
        } else {
            0
        };
        let xs = &rhos[skip..];
        let scaled: Vec<Complex64> = xs
            .iter()
            .zip(&values[skip..])
            .map(|(r, v)| v / r.sin().powi(k))
            .collect();
        let sign = if (n.unsigned_abs() as i32 + k) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let coverage = xs.last().map_or(0.0, |r| r.tan());
        let part = |pick: fn(&Complex64) -> f64| -> Result<RadialProfile> {
            let ys: Vec<f64> = scaled.iter().map(pick).collect();
            if ys.iter().all(|&y| y == 0.0) {
                return Ok(RadialProfile::zero());
            }
            let spline = CubicSpline::natural(
                xs.iter()
                    .rev()
                    .filter(|&&r| r > 0.0)
                    .map(|r| -r)
                    .chain(xs.iter().copied())
                    .collect(),
                ys.iter()
                    .zip(xs)
                    .rev()
                    .filter(|(_, &r)| r > 0.0)
                    .map(|(y, _)| sign * y)
                    .chain(ys.iter().copied())
                    .collect(),
            )?;
            Ok(RadialProfile::covered(
                move |x: f64| {
                    let rho = x.atan();
                    spline.eval(rho) * rho.sin().powi(k)
                },
                coverage,
                None,
            ))
        };
        Ok(Self::new(n, Side::Sphere, part(|v| v.re)?, part(|v| v.im)?))
    }

    /// Cylinder or dual mode from complex samples on `[0, T]`, mirrored by
    /// the parity `(−1)^|n|` of even fields.
    pub fn radial_sampled(
        n: i64,
        side: Side,
        ts: &[f64],
        values: &[Complex64],
        tail: Option<Tail>,
    ) -> Result<Self> {
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let build = |ys: &[f64]| {
            if ys.iter().all(|&y| y == 0.0) {
                Ok(RadialProfile::zero())
            } else {
                RadialProfile::sampled(ts, ys, Some(sign), tail)
            }
        };
        Ok(Self::new(n, side, build(&re)?, build(&im)?))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.re.eval(x)?, self.im.eval(x)?))
    }

    /// Copy whose every read is recorded in `log`.
    pub fn instrumented(&self, log: Arc<ReadLog>) -> Self {
        Self {
            n: self.n,
            side: self.side,
            re: self.re.wrap(log.clone()),
            im: self.im.wrap(log),
        }
    }

    /// Apply the same real-linear operation to both parts.
    pub(crate) fn apply<F>(&self, mut op: F) -> Result<Complex64>
    where
        F: FnMut(&RadialProfile) -> Result<f64>,
    {
        let re = if self.re.is_zero() {
            0.0
        } else {
            op(&self.re)?
        };
        let im = if self.im.is_zero() {
            0.0
        } else {
            op(&self.im)?
        };
        Ok(Complex64::new(re, im))
    }
}

/// `(−1)^|n|`.
pub fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
