//! Acceptance suite for the end-to-end deliverable: nine checks, each
//! printing one verdict line (run with `-- --nocapture` to see them all).
//!
//! The first three criteria share a single full default-configuration sweep;
//! the rest drive the library through the same public surface the binary
//! uses. Checks state what was measured in their verdict line, pass or fail.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use sim_isac::channel::build_channels;
use sim_isac::conic::{AffineHermitian, ConicProblem, SolveStatus, SolverOptions};
use sim_isac::fixtures::{desk_geometry, tiny_instance};
use sim_isac::linalg;
use sim_isac::mao::{mao_optimize, MaoParams};
use sim_isac::metrics::crb_extended;
use sim_isac::oracle::{brute_force_joint, kkt_check, recompute_diffraction, GridSpec};
use sim_isac::propagation::{diffraction_matrix, end_to_end_matrix, PhaseStack, SimGeometry};
use sim_isac::{CMat, CVec, Complex64};

use sim_isac_cli::config::{self, linear_to_db, ExperimentConfig};
use sim_isac_cli::sweep::{self, CellResult, SweepOptions};

fn default_config() -> ExperimentConfig {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml");
    config::load(path).expect("default configuration loads")
}

/// The full default sweep, run once and shared by criteria 1-3.
fn full_sweep() -> &'static (Vec<CellResult>, Duration) {
    static SWEEP: OnceLock<(Vec<CellResult>, Duration)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let config = default_config();
        let start = Instant::now();
        let rows = sweep::run_sweep(&config, &SweepOptions::default())
            .expect("default sweep runs");
        (rows, start.elapsed())
    })
}

fn verdict(number: usize, name: &str, pass: bool, details: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {word} — {details}");
    assert!(pass, "criterion {number} ({name}) failed — {details}");
}

#[test]
fn criterion_1_layer_count_trend() {
    let config = default_config();
    let (rows, elapsed) = full_sweep();
    let series = sweep::median_series(rows);
    let median = |layers: usize| -> f64 {
        series
            .iter()
            .find(|p| p.layers == layers && p.gamma_db == 10.0)
            .expect("median point exists")
            .median_crb
    };
    let (m1, m2, m3) = (median(1), median(2), median(3));
    let seeds = config.sweep.seeds.len();
    let in_budget = *elapsed <= Duration::from_secs(30 * 60);
    let ordered = m3 <= m2 && m2 <= m1;
    let details = format!(
        "median bound at 10 dB threshold: L=1 {:.2} dB, L=2 {:.2} dB, L=3 {:.2} dB \
         (gap L1→L2 {:+.2} dB, L2→L3 {:+.2} dB); {} seeds; sweep took {:.0?}",
        linear_to_db(m1),
        linear_to_db(m2),
        linear_to_db(m3),
        linear_to_db(m2) - linear_to_db(m1),
        linear_to_db(m3) - linear_to_db(m2),
        seeds,
        elapsed,
    );
    verdict(1, "layer_count_trend", ordered && seeds >= 20 && in_budget, &details);
}

#[test]
fn criterion_2_threshold_tradeoff() {
    let config = default_config();
    let (rows, _) = full_sweep();
    let series = sweep::median_series(rows);
    let mut worst_drop = 0.0f64;
    let mut at = String::from("none");
    for &layers in &config.sweep.layers {
        let curve: Vec<_> = series.iter().filter(|p| p.layers == layers).collect();
        for pair in curve.windows(2) {
            let drop = linear_to_db(pair[0].median_crb) - linear_to_db(pair[1].median_crb);
            if drop > worst_drop {
                worst_drop = drop;
                at = format!(
                    "L={layers}, {}→{} dB threshold",
                    pair[0].gamma_db, pair[1].gamma_db
                );
            }
        }
    }
    let details = format!(
        "worst median-bound drop along rising thresholds: {worst_drop:.3} dB ({at}); tolerance 0.2 dB"
    );
    verdict(2, "threshold_tradeoff", worst_drop <= 0.2, &details);
}

#[test]
fn criterion_3_safeguard_monotonicity() {
    let (rows, _) = full_sweep();
    let mut checked = 0usize;
    let mut violation = None;
    for row in rows {
        for pair in row.trace.windows(2) {
            checked += 1;
            if pair[1] > pair[0] {
                violation = Some(format!(
                    "seed {} L={} threshold {} dB: {} → {}",
                    row.seed, row.layers, row.gamma_db, pair[0], pair[1]
                ));
            }
        }
    }
    let details = match &violation {
        Some(v) => format!("best-bound trace increased at {v}"),
        None => format!("{checked} consecutive trace steps, none increasing, zero tolerance"),
    };
    verdict(3, "safeguard_monotonicity", violation.is_none(), &details);
}

#[test]
fn criterion_4_recovery_identities() {
    let config = default_config();
    let scenario = config.scenario(10.0).unwrap();
    let geom = config.geometry(2).unwrap();
    let channels = build_channels(&scenario, &geom, 0).unwrap();
    let result = mao_optimize(&scenario, &channels, &config.mao_params(0)).unwrap();

    let sdp = linalg::hermitize(&result.solution.sdp_block_covariance());
    let recovered = linalg::hermitize(&result.solution.block_covariance());
    let frob_rel = linalg::frob(&(&recovered - &sdp)) / linalg::frob(&sdp);

    let sinr_ok = result
        .evaluation
        .sinrs
        .iter()
        .zip(&scenario.sinr_thresholds)
        .all(|(&sinr, &gamma)| sinr >= gamma * (1.0 - 1e-6));

    let p = end_to_end_matrix(&result.stack, &channels.omega).unwrap();
    let implied = crb_extended(
        &p,
        &channels.g,
        &sdp,
        scenario.radar_noise,
        scenario.symbols_per_block,
    )
    .unwrap();
    let crb_rel = (result.evaluation.crb.crb - implied.crb).abs() / implied.crb;

    let details = format!(
        "block covariance preserved to {frob_rel:.2e} relative (tolerance 1e-9); \
         all thresholds met within 1e-6 relative: {sinr_ok}; \
         bound shifted {crb_rel:.2e} relative by extraction (tolerance 1e-9)"
    );
    verdict(
        4,
        "recovery_identities",
        frob_rel <= 1e-9 && sinr_ok && crb_rel <= 1e-9,
        &details,
    );
}

#[test]
fn criterion_5_oracle_equivalence() {
    let start = Instant::now();
    let grid = GridSpec { points_per_element: 16 };
    let mut within = 0usize;
    let mut comparable = 0usize;
    let mut worst_ratio = 0.0f64;
    for seed in 0..15 {
        let (scenario, channels) = tiny_instance(seed, 1.5);
        let oracle = match brute_force_joint(&scenario, &channels, grid).unwrap() {
            Some(optimum) => optimum,
            None => continue,
        };
        let mao = match mao_optimize(&scenario, &channels, &MaoParams::new(seed)) {
            Ok(result) => result,
            Err(_) => continue,
        };
        comparable += 1;
        let ratio = mao.evaluation.crb.crb / oracle.crb;
        worst_ratio = worst_ratio.max(ratio);
        if ratio <= 1.10 {
            within += 1;
        }
    }
    let elapsed = start.elapsed();
    let in_budget = elapsed <= Duration::from_secs(5 * 60);
    let details = format!(
        "{within} of {comparable} comparable seeds within 1.10× of the exhaustive \
         16-point optimum (need ≥ 10; worst ratio {worst_ratio:.4}); took {elapsed:.0?}"
    );
    verdict(5, "oracle_equivalence", within >= 10 && in_budget, &details);
}

#[test]
fn criterion_6_conic_certification() {
    // Certified optimality on a tiny run and on a default-scale cell.
    let mut worst_kkt = 0.0f64;
    let mut solves = 0usize;
    let mut all_pass = true;
    {
        let (scenario, channels) = tiny_instance(5, 2.0);
        let params = MaoParams { randomization_count: 50, certify: true, ..MaoParams::new(5) };
        let result = mao_optimize(&scenario, &channels, &params).unwrap();
        for solve in &result.certified {
            let report = kkt_check(&solve.problem, &solve.solution);
            worst_kkt = worst_kkt
                .max(report.primal)
                .max(report.dual)
                .max(report.complementarity)
                .max(report.gap);
            all_pass &= report.pass;
            solves += 1;
        }
    }
    {
        let config = default_config();
        let scenario = config.scenario(10.0).unwrap();
        let geom = config.geometry(2).unwrap();
        let channels = build_channels(&scenario, &geom, 0).unwrap();
        let mut params = config.mao_params(0);
        params.certify = true;
        let result = mao_optimize(&scenario, &channels, &params).unwrap();
        for solve in &result.certified {
            let report = kkt_check(&solve.problem, &solve.solution);
            worst_kkt = worst_kkt
                .max(report.primal)
                .max(report.dual)
                .max(report.complementarity)
                .max(report.gap);
            all_pass &= report.pass;
            solves += 1;
        }
    }

    // The inverse-trace epigraph against the direct value on a fixed matrix.
    let x = CMat::from_diagonal(&CVec::from_column_slice(&[
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(4.0, 0.0),
    ]));
    let direct = 1.0 + 0.5 + 0.25;
    let mut problem = ConicProblem::new();
    problem.add_trace_inverse_epigraph(&AffineHermitian::constant(x), 1.0);
    let sol = problem.solve(&SolverOptions::default());
    let epigraph_rel = (sol.objective - direct).abs() / direct;
    let epigraph_ok = sol.status == SolveStatus::Optimal && epigraph_rel <= 1e-6;

    let details = format!(
        "{solves} recorded solves certified, worst independent KKT residual {worst_kkt:.2e} \
         (tolerance 1e-6); fixed-matrix epigraph off by {epigraph_rel:.2e} relative"
    );
    verdict(
        6,
        "conic_certification",
        all_pass && worst_kkt <= 1e-6 && solves > 0 && epigraph_ok,
        &details,
    );
}

#[test]
fn criterion_7_estimability_rank_logic() {
    let (scenario, channels) = tiny_instance(0, 1.5);
    let n = channels.g.nrows();
    let m = scenario.bs_antennas;
    assert!(n >= 2, "needs at least two atoms");
    let p = end_to_end_matrix(&PhaseStack::zeros(1, n), &channels.omega).unwrap();

    // One user, no sensing covariance: R_ie is rank one and the bound is
    // infinite by the rank condition.
    let w = CVec::from_fn(m, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.5 }, 0.3));
    let rank_one = CMat::from_fn(m, m, |i, j| w[i] * w[j].conj());
    let degenerate = crb_extended(
        &p,
        &channels.g,
        &rank_one,
        scenario.radar_noise,
        scenario.symbols_per_block,
    )
    .unwrap();

    // A floor of ε·I restores estimability.
    let epsilon = 1e-6 * scenario.total_power / m as f64;
    let floored = &rank_one + CMat::identity(m, m) * Complex64::new(epsilon, 0.0);
    let restored = crb_extended(
        &p,
        &channels.g,
        &floored,
        scenario.radar_noise,
        scenario.symbols_per_block,
    )
    .unwrap();

    let details = format!(
        "rank-one covariance: estimable={}, bound={}; with ε·I floor (ε={epsilon:.1e}): \
         estimable={}, bound={:.3e}",
        degenerate.estimable, degenerate.crb, restored.estimable, restored.crb
    );
    verdict(
        7,
        "estimability_rank_logic",
        !degenerate.estimable
            && degenerate.crb.is_infinite()
            && restored.estimable
            && restored.crb.is_finite(),
        &details,
    );
}

#[test]
fn criterion_8_diffraction_cross_check() {
    let config = default_config();
    let mut worst = 0.0f64;
    for layers in [2, 3, 5] {
        worst = worst.max(recompute_diffraction(&desk_geometry(layers)));
    }
    worst = worst.max(recompute_diffraction(&config.geometry(3).unwrap()));

    // Single on-axis atom pair at unit wavelength and unit spacing with a
    // quarter-unit area: coupling is 0.25·(1/(2π) − j)·e^{j2π}.
    let geom = SimGeometry::with_pitch_and_area(2, 1, 1.0, 1.0, 0.5, 0.25).unwrap();
    let coupling = diffraction_matrix(&geom).unwrap()[(0, 0)];
    let hand = Complex64::new(0.0397887, -0.25);
    let hand_rel = (coupling - hand).norm() / hand.norm();

    let details = format!(
        "worst naive-loop recomputation residual {worst:.2e} (tolerance 1e-12); \
         on-axis hand value off by {hand_rel:.2e} relative (six significant digits)"
    );
    verdict(
        8,
        "diffraction_cross_check",
        worst <= 1e-12 && hand_rel <= 5e-7,
        &details,
    );
}

#[test]
fn criterion_9_csv_determinism() {
    // Two executions of the actual binary's `run` over a reduced grid.
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("reduced.toml");
    let reduced = include_str!("../../../configs/default.toml")
        .replace(
            "gammas_db = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]",
            "gammas_db = [0.0, 10.0]",
        )
        .replace("layers = [1, 2, 3]", "layers = [1, 2]")
        .replace(
            "seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19]",
            "seeds = [0, 1]",
        );
    assert!(reduced.contains("seeds = [0, 1]"), "sweep grid was reduced");
    std::fs::write(&config_path, reduced).unwrap();

    let outputs: Vec<Vec<u8>> = ["a.csv", "b.csv"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_sim-isac"))
                .arg("--config")
                .arg(&config_path)
                .arg("run")
                .arg("--out")
                .arg(&out)
                .status()
                .expect("binary runs");
            assert!(status.success(), "run execution failed");
            std::fs::read(&out).unwrap()
        })
        .collect();

    let identical = outputs[0] == outputs[1];
    let details = format!(
        "two `run` executions over 8 cells: byte-identical={identical} ({} bytes)",
        outputs[0].len()
    );
    verdict(9, "csv_determinism", identical, &details);
}
