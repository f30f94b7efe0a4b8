//! Result serialization.
//!
//! Sweep tables are written as plain CSV with a fixed column set. Floats use
//! Rust's shortest-round-trip formatting, so re-parsing a file reproduces the
//! original values bit for bit and two runs of the same configuration produce
//! byte-identical files. Non-finite values appear as `inf` / `NaN`.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::sweep::{CellResult, SeriesPoint};

pub const CSV_HEADER: &str = "seed,L,gamma_db,crb,crb_db,min_sinr_margin_db,power_w,sweeps,status,wall_ms";

fn push_row(out: &mut String, row: &CellResult) {
    let crb_db = 10.0 * row.crb.log10();
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        row.seed,
        row.layers,
        row.gamma_db,
        row.crb,
        crb_db,
        row.min_sinr_margin_db,
        row.power_w,
        row.sweeps,
        row.status.as_str(),
        row.wall_ms,
    ));
}

/// The sweep table as one CSV string (header line included, LF endings).
pub fn csv_string(rows: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        push_row(&mut out, row);
    }
    out
}

pub fn write_csv(rows: &[CellResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    file.write_all(csv_string(rows).as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}

/// Per-layer threshold-versus-median-bound series, for plotting.
pub fn series_csv_string(series: &[SeriesPoint]) -> String {
    let mut out = String::from("L,gamma_db,median_crb,median_crb_db\n");
    for point in series {
        let db = 10.0 * point.median_crb.log10();
        out.push_str(&format!(
            "{},{},{},{}\n",
            point.layers, point.gamma_db, point.median_crb, db
        ));
    }
    out
}

pub fn write_series_csv(series: &[SeriesPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    file.write_all(series_csv_string(series).as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}
