//! Atomic file output: CSV grids, JSON sidecars and metrics.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cylradon::io::{write_grid, GridKind};
use cylradon::{Grid2, QuadratureSpec};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::Failure;

/// Write through a temporary file in `dir`, renamed into place on success.
pub fn atomic_write<F>(dir: &Path, name: &str, body: F) -> Result<PathBuf, Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Failure>,
{
    fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    let target = dir.join(name);
    let io = |e: std::io::Error| Failure::numeric(format!("writing {}: {e}", target.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush().map_err(io)?;
    }
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    atomic_write(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)
            .map_err(|e| Failure::numeric(e.to_string()))?;
        w.write_all(b"\n")
            .map_err(|e| Failure::numeric(e.to_string()))
    })
}

#[derive(Debug, Serialize)]
pub struct Axis {
    pub name: &'static str,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a> {
    pub version: &'static str,
    pub command: &'a str,
    pub source: &'a str,
    pub kind: GridKind,
    pub grid: [Axis; 2],
    pub modes: Option<u32>,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

fn axis(name: &'static str, xs: &[f64]) -> Axis {
    Axis {
        name,
        count: xs.len(),
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Write `<command>.csv` and its `<command>.json` sidecar.
pub struct Run<'a> {
    pub dir: &'a Path,
    pub command: &'a str,
    pub source: &'a str,
    pub modes: Option<u32>,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

impl Run<'_> {
    pub fn emit(&self, grid: &Grid2, kind: GridKind) -> Result<PathBuf, Failure> {
        let csv = atomic_write(self.dir, &format!("{}.csv", self.command), |w| {
            write_grid(w, grid, kind).map_err(|e| Failure::numeric(e.to_string()))
        })?;
        let [a, b] = kind.header()[..2] else {
            unreachable!()
        };
        let sidecar = Sidecar {
            version: cylradon::VERSION,
            command: self.command,
            source: self.source,
            kind,
            grid: [axis(a, &grid.a), axis(b, &grid.b)],
            modes: self.modes,
            seed: self.seed,
            quadrature: self.quadrature,
        };
        write_json(self.dir, &format!("{}.json", self.command), &sidecar)?;
        Ok(csv)
    }
}

#[derive(Debug, Serialize)]
pub struct Metrics {
    pub reference: String,
    pub points: usize,
    pub rel_l2: f64,
    pub max_abs_error: f64,
}

/// Compare a grid against reference values at the same nodes.
pub fn metrics<F>(reference: &str, grid: &Grid2, mut want: F) -> Result<Metrics, Failure>
where
    F: FnMut(f64, f64) -> Result<num_complex::Complex64, Failure>,
{
    let (mut num, mut den, mut worst) = (0.0, 0.0, 0.0f64);
    for (i, &a) in grid.a.iter().enumerate() {
        for (j, &b) in grid.b.iter().enumerate() {
            let w = want(a, b)?;
            let d = (grid.at(i, j) - w).norm();
            num += d * d;
            den += w.norm_sqr();
            worst = worst.max(d);
        }
    }
    Ok(Metrics {
        reference: reference.to_owned(),
        points: grid.values.len(),
        rel_l2: if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        },
        max_abs_error: worst,
    })
}
