//! The pipelines behind each subcommand.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cylradon::checks::{run_suite, Suite};
use cylradon::dual::{dual_grid, dual_reconstruct};
use cylradon::forward::radon_grid;
use cylradon::fourier::{analyze_samples, analyze_sinogram, synthesize, ModeSet};
use cylradon::inversion::reconstruct;
use cylradon::io::{read_grid, GridKind};
use cylradon::phantoms::{self, from_id, sphere_from_id};
use cylradon::{
    CylinderField, Grid2, ModeProfile, Parity, QuadratureSpec, Side, SphereField, Tail,
};
use log::info;
use num_complex::Complex64;

use crate::config::{Config, CylinderGrid, SphereGrid};
use crate::output::{metrics, write_json, Run};
use crate::Failure;

pub const DEFAULT_MODES: u32 = 8;

/// Settings shared by every subcommand after merging flags into the config.
pub struct Context {
    pub config: Config,
    pub out: PathBuf,
    pub quad: QuadratureSpec,
    pub seed: u64,
}

impl Context {
    fn run<'a>(&'a self, command: &'a str, source: &'a str, modes: Option<u32>) -> Run<'a> {
        Run {
            dir: &self.out,
            command,
            source,
            modes,
            seed: self.seed,
            quadrature: self.quad,
        }
    }

    /// Requested mode count, or the default capped by `nodes` angular samples.
    fn modes(&self, nodes: usize) -> u32 {
        self.config
            .modes
            .unwrap_or_else(|| DEFAULT_MODES.min((nodes.saturating_sub(1) / 2) as u32))
    }

    fn source(&self) -> Result<Source, Failure> {
        match (&self.config.phantom, &self.config.input) {
            (Some(id), None) => Ok(Source::Phantom(id.clone())),
            (None, Some(path)) => Ok(Source::File(path.clone())),
            (Some(_), Some(_)) => Err(Failure::usage(
                "give either a phantom or an input file, not both",
            )),
            (None, None) => Err(Failure::usage("no input: set a phantom or an input file")),
        }
    }

    fn sphere_grid(&self, default: SphereGrid) -> SphereGrid {
        self.config.sphere_grid.unwrap_or(default)
    }

    fn cylinder_grid(&self, default: CylinderGrid) -> CylinderGrid {
        self.config.cylinder_grid.unwrap_or(default)
    }

    fn write_metrics(
        &self,
        command: &str,
        m: Option<crate::output::Metrics>,
    ) -> Result<(), Failure> {
        if let Some(m) = m {
            info!(
                "{command}: relative L2 error {:.3e} against {}",
                m.rel_l2, m.reference
            );
            write_json(&self.out, &format!("{command}.metrics.json"), &m)?;
        }
        Ok(())
    }
}

enum Source {
    Phantom(String),
    File(PathBuf),
}

impl Source {
    fn label(&self) -> String {
        match self {
            Source::Phantom(id) => id.clone(),
            Source::File(p) => p.display().to_string(),
        }
    }
}

const FORWARD_GRID: SphereGrid = SphereGrid {
    n_theta: 32,
    n_rho: 48,
    rho_min: 0.0,
    rho_max: 1.2,
};

const INVERT_GRID: CylinderGrid = CylinderGrid {
    n_s: 32,
    n_t: 19,
    t_min: 0.2,
    t_max: 2.0,
};

const DUAL_GRID: CylinderGrid = CylinderGrid {
    n_s: 32,
    n_t: 31,
    t_min: 0.0,
    t_max: 3.0,
};

/// Dual data must reach far up the cylinder: the inverse integrates it
/// over `(t, ∞)`.
const DUAL_DATA_GRID: CylinderGrid = CylinderGrid {
    n_s: 16,
    n_t: 193,
    t_min: 0.0,
    t_max: 24.0,
};

const DUALINVERT_GRID: SphereGrid = SphereGrid {
    n_theta: 16,
    n_rho: 12,
    rho_min: 0.1,
    rho_max: 1.2,
};

fn read_csv(path: &Path, kind: GridKind) -> Result<Grid2, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))?;
    read_grid(BufReader::new(file), kind)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Even cylinder field interpolating samples; zero beyond the sampled heights.
fn cylinder_from_samples(grid: &Grid2, n_max: u32) -> Result<CylinderField, Failure> {
    if grid.b.iter().any(|&t| t < 0.0) {
        log::warn!("cylinder input is read as an even field; rows with t < 0 are ignored");
    }
    let ms = analyze_samples(grid, n_max, Side::Cylinder, Some(Tail::Rapid))?;
    Ok(CylinderField::new(
        "input",
        move |s, t| synthesize(&ms, s, t).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        Parity::Even,
    )
    .vanishing(Tail::Rapid))
}

/// Even sphere field interpolating a sampled upper hemisphere. Modes are
/// held constant beyond the last polar row.
fn sphere_from_samples(grid: &Grid2, n_max: u32) -> Result<SphereField, Failure> {
    let sampled = analyze_sinogram(grid, n_max)?;
    let mut ms = ModeSet::new(n_max, Side::Sphere, true);
    for p in sampled.iter() {
        let tail = Some(Tail::Power(0.0));
        ms.insert(ModeProfile::new(
            p.n,
            p.side,
            p.re.clone().with_tail(tail),
            p.im.clone().with_tail(tail),
        ))?;
    }
    Ok(SphereField::new(
        "input",
        move |theta, rho| {
            let (theta, rho) = if rho > FRAC_PI_2 {
                (theta + PI, PI - rho)
            } else {
                (theta, rho)
            };
            synthesize(&ms, theta, rho.tan())
        },
        Parity::Even,
    ))
}

pub fn forward(ctx: &Context) -> Result<ExitCode, Failure> {
    let source = ctx.source()?;
    let (thetas, rhos) = ctx.sphere_grid(FORWARD_GRID).axes()?;
    let (f, modes) = match &source {
        Source::Phantom(id) => (from_id(id)?, None),
        Source::File(path) => {
            let grid = read_csv(path, GridKind::Cylinder)?;
            let n = ctx.modes(grid.a.len());
            (cylinder_from_samples(&grid, n)?, Some(n))
        }
    };
    let sino = radon_grid(&f, &thetas, &rhos, &ctx.quad)?;
    let label = source.label();
    ctx.run("forward", &label, modes)
        .emit(&sino, GridKind::Sphere)?;
    let m = match &ctx.config.reference {
        Some(id) => {
            let known = phantoms::known_transform(id)
                .ok_or_else(|| Failure::usage(format!("no closed-form transform for {id:?}")))?;
            Some(metrics(
                id,
                &sino,
                |theta, rho| Ok(known.eval(theta, rho)?),
            )?)
        }
        None => None,
    };
    ctx.write_metrics("forward", m)?;
    Ok(ExitCode::SUCCESS)
}

pub fn invert(ctx: &Context) -> Result<ExitCode, Failure> {
    let source = ctx.source()?;
    let sino = match &source {
        Source::Phantom(id) => {
            let (thetas, rhos) = ctx.sphere_grid(FORWARD_GRID).axes()?;
            radon_grid(&from_id(id)?, &thetas, &rhos, &ctx.quad)?
        }
        Source::File(path) => read_csv(path, GridKind::Sphere)?,
    };
    let n = ctx.modes(sino.a.len());
    let (ss, ts) = ctx.cylinder_grid(INVERT_GRID).axes()?;
    let rec = reconstruct(&sino, n, &ts, &ctx.quad)?;
    if !rec.dropped.is_empty() {
        info!("modes below the amplitude floor: {:?}", rec.dropped);
    }
    let out = rec.samples(&ss)?;
    let label = source.label();
    ctx.run("invert", &label, Some(n))
        .emit(&out, GridKind::Cylinder)?;
    let reference = ctx.config.reference.clone().or(match &source {
        Source::Phantom(id) => Some(id.clone()),
        Source::File(_) => None,
    });
    let m = match reference {
        Some(id) => {
            let f = from_id(&id)?;
            Some(metrics(&id, &out, |s, t| Ok(f.eval(s, t)))?)
        }
        None => None,
    };
    ctx.write_metrics("invert", m)?;
    Ok(ExitCode::SUCCESS)
}

fn sphere_source(ctx: &Context, source: &Source) -> Result<(SphereField, Option<u32>), Failure> {
    Ok(match source {
        Source::Phantom(id) => (sphere_from_id(id)?, None),
        Source::File(path) => {
            let grid = read_csv(path, GridKind::Sphere)?;
            let n = ctx.modes(grid.a.len());
            (sphere_from_samples(&grid, n)?, Some(n))
        }
    })
}

pub fn dual(ctx: &Context) -> Result<ExitCode, Failure> {
    let source = ctx.source()?;
    let (g, modes) = sphere_source(ctx, &source)?;
    let (ss, ts) = ctx.cylinder_grid(DUAL_GRID).axes()?;
    let out = dual_grid(&g, &ss, &ts, &ctx.quad)?;
    let label = source.label();
    ctx.run("dual", &label, modes)
        .emit(&out, GridKind::Cylinder)?;
    let m = match &ctx.config.reference {
        Some(id) => {
            let known = phantoms::known_dual(id).ok_or_else(|| {
                Failure::usage(format!("no closed-form dual transform for {id:?}"))
            })?;
            Some(metrics(id, &out, |s, t| Ok(known.eval(s, t)))?)
        }
        None => None,
    };
    ctx.write_metrics("dual", m)?;
    Ok(ExitCode::SUCCESS)
}

pub fn dualinvert(ctx: &Context) -> Result<ExitCode, Failure> {
    let source = ctx.source()?;
    // R*g decays like t^{-2-k} for a field vanishing to order k at the
    // equator; sampled data are assumed to decay at least like t^{-2}.
    let (data, decay) = match &source {
        Source::Phantom(id) => {
            let g = sphere_from_id(id)?;
            let (ss, ts) = ctx.cylinder_grid(DUAL_DATA_GRID).axes()?;
            (dual_grid(&g, &ss, &ts, &ctx.quad)?, 2.0 + g.equator_order)
        }
        Source::File(path) => (read_csv(path, GridKind::Cylinder)?, 2.0),
    };
    let n = ctx.modes(data.a.len());
    let (thetas, rhos) = ctx.sphere_grid(DUALINVERT_GRID).axes()?;
    let rec = dual_reconstruct(&data, n, decay, &thetas, &rhos, &ctx.quad)?;
    if !rec.dropped.is_empty() {
        info!("modes below the amplitude floor: {:?}", rec.dropped);
    }
    let out = rec.grid;
    let label = source.label();
    ctx.run("dualinvert", &label, Some(n))
        .emit(&out, GridKind::Sphere)?;
    let reference = ctx.config.reference.clone().or(match &source {
        Source::Phantom(id) => Some(id.clone()),
        Source::File(_) => None,
    });
    let m = match reference {
        Some(id) => {
            let g = sphere_from_id(&id)?;
            Some(metrics(&id, &out, |theta, rho| Ok(g.eval(theta, rho)?))?)
        }
        None => None,
    };
    ctx.write_metrics("dualinvert", m)?;
    Ok(ExitCode::SUCCESS)
}

pub fn check(ctx: &Context, suite: &str) -> Result<ExitCode, Failure> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, &ctx.quad, ctx.seed);
    for c in &report.checks {
        println!(
            "{} {}: {:.3e} (threshold {:.3e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.threshold,
            c.detail
        );
    }
    write_json(&ctx.out, "check.json", &report)?;
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
