//! CSV exchange of sampled fields.
//!
//! Sphere grids use the header `theta,rho,re,im` and cylinder grids
//! `s,t,re,im`. Rows are row-major: the first coordinate is the slow index.
//! Floats are written in shortest round-trip form (exponent notation for
//! very small or large magnitudes), so output is byte-identical for
//! identical values.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Grid2;

/// Which coordinate names a grid carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Sphere,
    Cylinder,
}

impl GridKind {
    pub fn header(self) -> [&'static str; 4] {
        match self {
            GridKind::Sphere => ["theta", "rho", "re", "im"],
            GridKind::Cylinder => ["s", "t", "re", "im"],
        }
    }
}

pub fn write_grid<W: Write>(out: W, grid: &Grid2, kind: GridKind) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(kind.header())?;
    for (i, a) in grid.a.iter().enumerate() {
        for (j, b) in grid.b.iter().enumerate() {
            let v = grid.at(i, j);
            w.write_record([a, b, &v.re, &v.im].map(|x| format!("{x:?}")))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parse a grid written by [`write_grid`]. The header must match `kind`,
/// and the rows must enumerate a full product grid in row-major order.
pub fn read_grid<R: Read>(input: R, kind: GridKind) -> Result<Grid2> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != kind.header() {
        return Err(Error::InvalidGrid(format!(
            "expected header {:?}, found {:?}",
            kind.header().join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<f64> {
            record
                .get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::InvalidGrid(format!("row {}: bad value in column {}", line + 2, k + 1))
                })
        };
        rows.push((field(0)?, field(1)?, Complex64::new(field(2)?, field(3)?)));
    }
    let first = rows
        .first()
        .ok_or_else(|| Error::InvalidGrid("no data rows".into()))?
        .0;
    let inner = rows.iter().take_while(|row| row.0 == first).count();
    if rows.len() % inner != 0 {
        return Err(Error::InvalidGrid(format!(
            "{} rows do not form a grid with {inner} columns",
            rows.len()
        )));
    }
    let b: Vec<f64> = rows[..inner].iter().map(|row| row.1).collect();
    let a: Vec<f64> = rows.iter().step_by(inner).map(|row| row.0).collect();
    for (idx, row) in rows.iter().enumerate() {
        let (i, j) = (idx / inner, idx % inner);
        if row.0 != a[i] || row.1 != b[j] {
            return Err(Error::InvalidGrid(format!(
                "row {} breaks the row-major grid order",
                idx + 2
            )));
        }
    }
    Grid2::new(a, b, rows.into_iter().map(|row| row.2).collect())
}
