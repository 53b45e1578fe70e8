//! Property suites run by the command-line `check` subcommand.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chebfrac::cormack_check;
use crate::dual::duality_gap;
use crate::error::{Error, Result};
use crate::field::{linspace, uniform_angles};
use crate::forward::{norm_cyl, norm_sph, radon_grid, transform};
use crate::inversion::{support_check, Verdict};
use crate::nullspace::nullspace_report;
use crate::phantoms;
use crate::quad::QuadratureSpec;

/// Lower bound on `z / r` for random Cormack draws. The integrand's terms
/// cancel like `(r/z)^l`, which costs about `l log₁₀(r/z)` digits.
pub const CORMACK_MIN_RATIO: f64 = 0.15;

/// Phantoms with finite L² norm used by the bound suite.
pub const L2_PHANTOMS: &[&str] = &[
    "gauss0",
    "gauss1",
    "gauss2",
    "gauss3",
    "gauss4:0.7",
    "gauss1:2",
    "odd",
    "bump",
    "collar:1",
];

/// Pairs `(f, g)` used by the duality suite.
pub const DUALITY_PAIRS: &[(&str, &str)] = &[
    ("gauss0", "const-sphere:1"),
    ("tcos", "cos-sphere"),
    ("gauss2", "cos2-sphere"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cormack,
    Bound,
    Nullspace,
    Support,
    Duality,
    All,
}

impl Suite {
    pub const NAMES: &'static [&'static str] =
        &["cormack", "bound", "nullspace", "support", "duality", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cormack" => Suite::Cormack,
            "bound" => Suite::Bound,
            "nullspace" => Suite::Nullspace,
            "support" => Suite::Support,
            "duality" => Suite::Duality,
            "all" => Suite::All,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown suite {s:?}; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Cormack => "cormack",
            Suite::Bound => "bound",
            Suite::Nullspace => "nullspace",
            Suite::Support => "support",
            Suite::Duality => "duality",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn below(
        name: impl Into<String>,
        residual: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed: residual.is_finite() && residual < threshold,
            residual,
            threshold,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, e: Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            residual: f64::NAN,
            threshold: f64::NAN,
            detail: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CheckReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// Run one suite. Failures inside a suite become failed checks rather than
/// errors, so a report is always produced.
pub fn run_suite(suite: Suite, q: &QuadratureSpec, seed: u64) -> CheckReport {
    let checks = match suite {
        Suite::Cormack => cormack_suite(q, seed),
        Suite::Bound => bound_suite(q),
        Suite::Nullspace => nullspace_suite(q),
        Suite::Support => support_suite(q),
        Suite::Duality => duality_suite(q),
        Suite::All => [
            Suite::Cormack,
            Suite::Bound,
            Suite::Nullspace,
            Suite::Support,
            Suite::Duality,
        ]
        .into_iter()
        .flat_map(|s| {
            run_suite(s, q, seed).checks.into_iter().map(move |mut c| {
                c.name = format!("{s}/{}", c.name);
                c
            })
        })
        .collect(),
    };
    CheckReport::new(suite, checks)
}

/// Random pairs `0 < z < r ≤ 3` with `z/r ≥ CORMACK_MIN_RATIO`.
pub fn cormack_draws(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(0.05..=3.0);
            let z = r * rng.gen_range(CORMACK_MIN_RATIO..0.999);
            (z, r)
        })
        .collect()
}

fn cormack_suite(q: &QuadratureSpec, seed: u64) -> Vec<Check> {
    (0..=8u32)
        .map(|l| {
            let name = format!("l={l}");
            let draws = cormack_draws(20, seed.wrapping_add(l as u64));
            let mut worst = 0.0f64;
            for (z, r) in draws {
                match cormack_check(l, z, r, q) {
                    Ok(d) => worst = worst.max(d),
                    Err(e) => return Check::failed(name, e),
                }
            }
            Check::below(name, worst, 1e-6, "max |integral - pi/2| over 20 draws")
        })
        .collect()
}

/// `‖Rf‖₂ / ‖f‖₂` for a phantom id.
pub fn norm_ratio(id: &str, q: &QuadratureSpec) -> Result<f64> {
    let f = phantoms::from_id(id)?;
    let denom = norm_cyl(&f, q)?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(norm_sph(&transform(&f, q), q)? / denom)
}

/// Quadrature for the bound suite: the ratio is only needed to about 1e−4,
/// and the phantoms' low angular bands are resolved by 64 nodes.
pub fn bound_base(q: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        n_angular: q.n_angular.min(64),
        ..*q
    }
}

fn bound_suite(q: &QuadratureSpec) -> Vec<Check> {
    let limit = 2f64.sqrt() * (1.0 + 1e-3);
    let base = bound_base(q);
    let jobs: Vec<(&str, &str, QuadratureSpec)> = L2_PHANTOMS
        .iter()
        .flat_map(|id| [(*id, "base", base), (*id, "refined", base.refined(2))])
        .collect();
    jobs.par_iter()
        .map(|(id, tag, quad)| {
            let name = format!("{id}@{tag}");
            match norm_ratio(id, quad) {
                // The ratio is a bound, so passing means ratio ≤ limit.
                Ok(ratio) => Check {
                    name,
                    passed: ratio <= limit,
                    residual: ratio,
                    threshold: limit,
                    detail: "||Rf|| / ||f||".into(),
                },
                Err(e) => Check::failed(name, e),
            }
        })
        .collect()
}

fn nullspace_suite(q: &QuadratureSpec) -> Vec<Check> {
    match nullspace_report(8, &[0.3, 1.0, 2.5], q) {
        Err(e) => vec![Check::failed("report", e)],
        Ok(report) => report
            .modes
            .iter()
            .map(|m| {
                let expected = crate::nullspace::generator_count(m.n);
                let mut c = Check::below(
                    format!("n={}", m.n),
                    m.forward_residual.max(m.dual_residual),
                    1e-6,
                    format!("{} generators (expected {expected})", m.count),
                );
                c.passed &= m.count == expected;
                c
            })
            .collect(),
    }
}

fn support_suite(q: &QuadratureSpec) -> Vec<Check> {
    let t0 = 1.0;
    let thetas = uniform_angles(32);
    let rhos = linspace(0.0, 1.3, 40);
    let mut checks = Vec::new();
    for (id, want) in [
        ("collar:1.2", Verdict::Vanishes),
        ("gauss2", Verdict::Nonzero),
    ] {
        let name = format!("{id}@t0={t0}");
        let outcome = phantoms::from_id(id)
            .and_then(|f| radon_grid(&f, &thetas, &rhos, q))
            .and_then(|sino| support_check(&sino, t0, 1e-6, q));
        match outcome {
            Ok(r) => checks.push(Check {
                name,
                passed: r.verdict == want
                    && r.reads_beyond_cap == 0
                    && (want == Verdict::Vanishes || r.reads > 0),
                residual: r.max_abs,
                threshold: 1e-6,
                detail: format!(
                    "verdict {:?} (expected {want:?}), {} reads, {} beyond the cap",
                    r.verdict, r.reads, r.reads_beyond_cap
                ),
            }),
            Err(e) => checks.push(Check::failed(name, e)),
        }
    }
    checks
}

/// Coarse quadrature at which the duality gap is still visible, so that
/// its decrease under refinement can be observed.
pub fn duality_base(q: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        n_angular: 16,
        ..*q
    }
}

fn duality_suite(q: &QuadratureSpec) -> Vec<Check> {
    let base = duality_base(q);
    DUALITY_PAIRS
        .iter()
        .map(|(fid, gid)| {
            let name = format!("{fid}~{gid}");
            let gaps = (|| -> Result<(f64, f64)> {
                let f = phantoms::from_id(fid)?;
                let g = phantoms::sphere_from_id(gid)?;
                Ok((
                    duality_gap(&f, &g, &base)?.gap,
                    duality_gap(&f, &g, &base.refined(2))?.gap,
                ))
            })();
            match gaps {
                Ok((coarse, fine)) => {
                    let mut c = Check::below(
                        name,
                        fine,
                        1e-3,
                        format!("gap {coarse:.3e} -> {fine:.3e} under refinement"),
                    );
                    c.passed &= fine < coarse;
                    c
                }
                Err(e) => Check::failed(name, e),
            }
        })
        .collect()
}
