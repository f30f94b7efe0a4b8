//! Command-line front end: sweep execution, single-cell inspection,
//! oracle-backed self checks, and plot-ready summaries.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use sim_isac::channel::build_channels;
use sim_isac::conic::SolverOptions;
use sim_isac::fixtures::{desk_geometry, tiny_instance};
use sim_isac::mao::{mao_optimize, MaoError, MaoParams, Termination};
use sim_isac::oracle::{
    brute_force_covariance, brute_force_joint, kkt_check, recompute_diffraction, GridSpec,
};
use sim_isac::propagation::{diffraction_matrix, PhaseStack, SimGeometry};
use sim_isac::subproblems::{assemble_beamforming_sdp, LayerContext};

use sim_isac_cli::config::{self, parse_seed_list, ExperimentConfig};
use sim_isac_cli::report;
use sim_isac_cli::sweep::{self, SweepOptions};

#[derive(Parser)]
#[command(
    name = "sim-isac",
    about = "Joint beamforming and stacked-metasurface phase optimization for sensing-communication tradeoffs"
)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, default_value = "configs/default.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write the cell table as CSV.
    Run {
        /// Output CSV path.
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Override the configured seeds: `a..b` or a comma-separated list.
        #[arg(long)]
        seeds: Option<String>,
        /// Worker thread count (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
        /// Record wall-clock times per cell (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Optimize one (seed, layers, threshold) cell and print its trace.
    Eval {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 10.0)]
        gamma_db: f64,
    },
    /// Check the pipeline against independent oracles and report PASS/FAIL.
    Validate,
    /// Run the sweep and write per-layer median-bound-versus-threshold series.
    PlotData {
        /// Output CSV path.
        #[arg(long, default_value = "plot_data.csv")]
        out: PathBuf,
        /// Override the configured seeds: `a..b` or a comma-separated list.
        #[arg(long)]
        seeds: Option<String>,
        /// Worker thread count (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { out, seeds, workers, timing } => {
            let mut config = config::load(&cli.config)?;
            apply_seed_override(&mut config, seeds.as_deref())?;
            let rows = sweep::run_sweep(&config, &SweepOptions { workers, timing })?;
            report::write_csv(&rows, &out)?;
            let failures = warn_failures(&rows);
            println!("{} cells -> {} ({} failed)", rows.len(), out.display(), failures);
            Ok(exit_by(failures == 0))
        }
        Command::Eval { seed, layers, gamma_db } => {
            let config = config::load(&cli.config)?;
            eval_cell(&config, seed, layers, gamma_db)
        }
        Command::Validate => {
            let config = config::load(&cli.config)?;
            Ok(exit_by(validate(&config)))
        }
        Command::PlotData { out, seeds, workers } => {
            let mut config = config::load(&cli.config)?;
            apply_seed_override(&mut config, seeds.as_deref())?;
            let rows = sweep::run_sweep(&config, &SweepOptions { workers, timing: false })?;
            let failures = warn_failures(&rows);
            let series = sweep::median_series(&rows);
            report::write_series_csv(&series, &out)?;
            println!("{} series points -> {} ({} cells failed)", series.len(), out.display(), failures);
            Ok(exit_by(failures == 0))
        }
    }
}

fn exit_by(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn apply_seed_override(config: &mut ExperimentConfig, seeds: Option<&str>) -> Result<()> {
    if let Some(text) = seeds {
        config.sweep.seeds = parse_seed_list(text)?;
    }
    Ok(())
}

fn warn_failures(rows: &[sweep::CellResult]) -> usize {
    let mut failures = 0;
    for row in rows {
        if let sweep::CellStatus::Error(message) = &row.status {
            eprintln!(
                "warning: cell seed={} L={} gamma_db={} failed: {message}",
                row.seed, row.layers, row.gamma_db
            );
            failures += 1;
        }
    }
    failures
}

fn eval_cell(config: &ExperimentConfig, seed: u64, layers: usize, gamma_db: f64) -> Result<ExitCode> {
    let scenario = config.scenario(gamma_db)?;
    let geom = config.geometry(layers)?;
    let channels = build_channels(&scenario, &geom, seed)?;
    let params = config.mao_params(seed);
    let start = std::time::Instant::now();
    println!("cell seed={seed} L={layers} gamma_db={gamma_db}");
    match mao_optimize(&scenario, &channels, &params) {
        Ok(result) => {
            let wall = start.elapsed();
            let eval = &result.evaluation;
            let status = match result.termination {
                Termination::Converged => "converged",
                Termination::SweepCap => "sweep_cap",
            };
            println!("status           {status}");
            println!("init attempts    {}", result.init_attempts);
            println!("sweeps           {}", result.sweeps);
            println!("crb              {:.6e} ({:.2} dB)", eval.crb.crb, 10.0 * eval.crb.crb.log10());
            println!("min SINR margin  {:+.4} dB", eval.min_margin_db);
            println!("power            {:.6e} W (budget {:.6e} W)", eval.power, scenario.total_power);
            println!("wall             {} ms", wall.as_millis());
            println!("best bound after initialization: {:.6e}", result.best_crb[0]);
            for entry in &result.trace {
                println!(
                    "  sweep {:>2}: crb {:.6e}, margin {:+.4} dB, power {:.6e} W",
                    entry.sweep, entry.crb, entry.min_margin_db, entry.power
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(MaoError::InfeasibleInit { attempts }) => {
            println!("status           infeasible_init ({attempts} attempts)");
            Ok(ExitCode::SUCCESS)
        }
        Err(err) => Err(err.into()),
    }
}

struct CheckLog {
    all_pass: bool,
}

impl CheckLog {
    fn new() -> Self {
        CheckLog { all_pass: true }
    }

    fn record(&mut self, name: &str, pass: bool, details: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("check {name}: {verdict} ({details})");
        self.all_pass &= pass;
    }
}

/// Oracle-backed self checks: recomputed inter-layer couplings, a hand-built
/// coupling value, certified optimality of every recorded conic solve, and
/// two brute-force searches on the tiny instance that bound the optimizer
/// from below.
fn validate(config: &ExperimentConfig) -> bool {
    let mut log = CheckLog::new();

    let mut worst = 0.0f64;
    for layers in [2, 3, 5] {
        worst = worst.max(recompute_diffraction(&desk_geometry(layers)));
    }
    worst = worst.max(recompute_diffraction(
        &config.geometry(3).expect("configured geometry is valid"),
    ));
    log.record(
        "diffraction_recompute",
        worst <= 1e-12,
        format!("worst residual {worst:.3e}, tolerance 1e-12"),
    );

    // Unit wavelength, unit spacing, quarter-unit atom area, single on-axis
    // atom pair: coupling is 0.25·(1/(2π) − j)·e^{j2π}.
    let geom = SimGeometry::with_pitch_and_area(2, 1, 1.0, 1.0, 0.5, 0.25)
        .expect("hand geometry is valid");
    let coupling = diffraction_matrix(&geom).expect("two layers")[(0, 0)];
    let hand = num_complex::Complex64::new(0.039788735772973836, -0.25);
    let delta = (coupling - hand).norm();
    log.record(
        "diffraction_hand_value",
        delta <= 1e-12,
        format!("|produced − hand| = {delta:.3e}"),
    );

    let (scenario, channels) = tiny_instance(5, 2.0);
    let params = MaoParams {
        randomization_count: 50,
        certify: true,
        ..MaoParams::new(5)
    };
    match mao_optimize(&scenario, &channels, &params) {
        Ok(result) => {
            let mut worst = 0.0f64;
            let mut failed = None;
            for solve in &result.certified {
                let report = kkt_check(&solve.problem, &solve.solution);
                let metric = report.primal.max(report.dual).max(report.complementarity).max(report.gap);
                worst = worst.max(metric);
                if !report.pass && failed.is_none() {
                    failed = Some(solve.label.clone());
                }
            }
            log.record(
                "certified_solves",
                failed.is_none(),
                match failed {
                    None => format!(
                        "{} solves, worst KKT residual {worst:.3e}, tolerance 1e-6",
                        result.certified.len()
                    ),
                    Some(label) => format!("first failing solve: {label}"),
                },
            );
        }
        Err(err) => log.record("certified_solves", false, format!("optimizer failed: {err}")),
    }

    let (scenario, channels) = tiny_instance(3, 2.0);
    match brute_force_joint(&scenario, &channels, GridSpec { points_per_element: 16 }) {
        Ok(Some(optimum)) => match mao_optimize(&scenario, &channels, &MaoParams::new(3)) {
            Ok(result) => {
                let ratio = result.evaluation.crb.crb / optimum.crb;
                log.record(
                    "joint_search_gap",
                    result.evaluation.feasible && ratio <= 1.10,
                    format!(
                        "optimizer {:.6e} vs grid search {:.6e}, ratio {ratio:.4}",
                        result.evaluation.crb.crb, optimum.crb
                    ),
                );
            }
            Err(err) => log.record("joint_search_gap", false, format!("optimizer failed: {err}")),
        },
        Ok(None) => log.record("joint_search_gap", false, "grid search found no feasible profile".into()),
        Err(err) => log.record("joint_search_gap", false, format!("grid search failed: {err}")),
    }

    let stack = PhaseStack::zeros(1, 2);
    let ctx = LayerContext::new(0, &stack, &channels).expect("tiny context");
    let sdp = assemble_beamforming_sdp(&scenario, &channels, &stack, &ctx);
    let solution = sdp.problem.solve(&SolverOptions::default());
    if solution.status.is_solved() {
        let surrogate = sdp.surrogate_value(&solution);
        match brute_force_covariance(&scenario, &channels, &stack, 8) {
            Some(brute) => {
                let rel = (brute - surrogate).abs() / surrogate;
                log.record(
                    "covariance_search_gap",
                    rel <= 0.02 && brute >= surrogate * (1.0 - 1e-6),
                    format!("surrogate {surrogate:.6e} vs direct search {brute:.6e}, rel {rel:.3e}"),
                );
            }
            None => log.record(
                "covariance_search_gap",
                false,
                "direct search found no feasible covariance".into(),
            ),
        }
    } else {
        log.record(
            "covariance_search_gap",
            false,
            format!("surrogate solve ended {:?}", solution.status),
        );
    }

    println!("validate: {}", if log.all_pass { "PASS" } else { "FAIL" });
    log.all_pass
}
