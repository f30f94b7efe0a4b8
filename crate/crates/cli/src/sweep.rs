//! Sweep execution over (seed, layer count, SINR threshold) cells.
//!
//! Each cell draws its channels deterministically from the seed, runs the
//! alternating optimization, and records the final bound together with the
//! constraint margins. Cells are independent, so they parallelize over a
//! rayon pool; the output table is sorted afterwards so the worker count
//! never changes the result.

use anyhow::{Context, Result};
use rayon::prelude::*;

use sim_isac::channel::build_channels;
use sim_isac::mao::{self, MaoError, Termination};

use crate::config::ExperimentConfig;

/// Outcome of one sweep cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Converged,
    SweepCap,
    /// No feasible beamformer was found for any tried phase initialization.
    InfeasibleInit,
    /// Solver or model failure; the cell carries no usable numbers.
    Error(String),
}

impl CellStatus {
    pub fn as_str(&self) -> &str {
        match self {
            CellStatus::Converged => "converged",
            CellStatus::SweepCap => "sweep_cap",
            CellStatus::InfeasibleInit => "infeasible_init",
            CellStatus::Error(_) => "error",
        }
    }

    /// Only hard errors fail a sweep; an infeasible initialization is a
    /// legitimate recorded outcome.
    pub fn is_failure(&self) -> bool {
        matches!(self, CellStatus::Error(_))
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub seed: u64,
    pub layers: usize,
    pub gamma_db: f64,
    pub crb: f64,
    pub min_sinr_margin_db: f64,
    pub power_w: f64,
    pub sweeps: usize,
    pub status: CellStatus,
    pub wall_ms: u64,
    /// Best bound after initialization and after each sweep.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Rayon worker count; `None` uses the default pool size.
    pub workers: Option<usize>,
    /// Record wall-clock times. Off by default so output files are
    /// byte-identical across runs.
    pub timing: bool,
}

/// Runs one (seed, layers, gamma) cell.
pub fn run_cell(
    config: &ExperimentConfig,
    seed: u64,
    layers: usize,
    gamma_db: f64,
    timing: bool,
) -> Result<CellResult> {
    let start = std::time::Instant::now();
    let scenario = config.scenario(gamma_db)?;
    let geom = config.geometry(layers)?;
    let channels = build_channels(&scenario, &geom, seed)?;
    let params = config.mao_params(seed);

    let mut cell = CellResult {
        seed,
        layers,
        gamma_db,
        crb: f64::INFINITY,
        min_sinr_margin_db: f64::NAN,
        power_w: f64::NAN,
        sweeps: 0,
        status: CellStatus::Error(String::new()),
        wall_ms: 0,
        trace: Vec::new(),
    };
    match mao::mao_optimize(&scenario, &channels, &params) {
        Ok(result) => {
            cell.crb = result.evaluation.crb.crb;
            cell.min_sinr_margin_db = result.evaluation.min_margin_db;
            cell.power_w = result.evaluation.power;
            cell.sweeps = result.sweeps;
            cell.status = match result.termination {
                Termination::Converged => CellStatus::Converged,
                Termination::SweepCap => CellStatus::SweepCap,
            };
            cell.trace = result.best_crb;
        }
        Err(MaoError::InfeasibleInit { .. }) => {
            cell.status = CellStatus::InfeasibleInit;
        }
        Err(err) => {
            cell.status = CellStatus::Error(err.to_string());
        }
    }
    if timing {
        cell.wall_ms = start.elapsed().as_millis() as u64;
    }
    Ok(cell)
}

/// Runs the full cross product of the configured seeds, layer counts, and
/// thresholds. Rows come back sorted by (seed, layers, gamma).
pub fn run_sweep(config: &ExperimentConfig, options: &SweepOptions) -> Result<Vec<CellResult>> {
    let mut cells: Vec<(u64, usize, f64)> = Vec::new();
    for &seed in &config.sweep.seeds {
        for &layers in &config.sweep.layers {
            for &gamma_db in &config.sweep.gammas_db {
                cells.push((seed, layers, gamma_db));
            }
        }
    }
    let run = || -> Result<Vec<CellResult>> {
        cells
            .par_iter()
            .map(|&(seed, layers, gamma_db)| {
                run_cell(config, seed, layers, gamma_db, options.timing)
            })
            .collect()
    };
    let mut rows = match options.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("building worker pool")?
            .install(run),
        None => run(),
    }?;
    rows.sort_by(|a, b| {
        (a.seed, a.layers)
            .cmp(&(b.seed, b.layers))
            .then(a.gamma_db.total_cmp(&b.gamma_db))
    });
    Ok(rows)
}

/// One point of a threshold-versus-bound curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub layers: usize,
    pub gamma_db: f64,
    pub median_crb: f64,
}

/// Median of the finished cells per (layers, gamma), across seeds. Cells
/// that errored are excluded; infeasible cells contribute their infinite
/// bound, which is what a median over seeds should see.
pub fn median_series(rows: &[CellResult]) -> Vec<SeriesPoint> {
    let mut groups: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for row in rows {
        if row.status.is_failure() {
            continue;
        }
        match groups
            .iter_mut()
            .find(|(l, g, _)| *l == row.layers && *g == row.gamma_db)
        {
            Some((_, _, values)) => values.push(row.crb),
            None => groups.push((row.layers, row.gamma_db, vec![row.crb])),
        }
    }
    let mut series: Vec<SeriesPoint> = groups
        .into_iter()
        .map(|(layers, gamma_db, mut values)| {
            values.sort_by(f64::total_cmp);
            let n = values.len();
            let median_crb = if n % 2 == 1 {
                values[n / 2]
            } else {
                0.5 * (values[n / 2 - 1] + values[n / 2])
            };
            SeriesPoint { layers, gamma_db, median_crb }
        })
        .collect();
    series.sort_by(|a, b| a.layers.cmp(&b.layers).then(a.gamma_db.total_cmp(&b.gamma_db)));
    series
}
