//! Safeguarded multi-layer alternating optimization.
//!
//! The loop alternates, for each metasurface layer from the user-facing side
//! inward, a transmit-covariance SDP (beamformers and sensing covariance at
//! fixed phases) with a per-layer phase relaxation plus Gaussian
//! randomization. Both stages optimize surrogates — the SDP a per-layer
//! trace-inverse proxy, the relaxation the SINR margins — so each candidate
//! update is re-scored against the exact bound and the exact constraints and
//! accepted only when it is feasible and does not worsen the bound. The best
//! bound therefore never increases, which the loop also asserts at runtime.

use thiserror::Error;

use crate::channel::{ChannelSet, Scenario};
use crate::conic::{ConicProblem, ConicSolution, SolveStatus, SolverOptions};
use crate::linalg;
use crate::metrics::{self, BeamformingSolution, CrbReport, MetricsError};
use crate::propagation::{end_to_end_matrix, PhaseStack, PropagationError};
use crate::rng::{stream_rng, Stream};
use crate::subproblems::{
    assemble_beamforming_sdp, assemble_phase_sdr, randomize_phases, recover_beamformers,
    LayerContext, SubproblemError,
};

/// Knobs of the alternating loop.
#[derive(Debug, Clone)]
pub struct MaoParams {
    /// Maximum number of full sweeps over the layers.
    pub max_sweeps: usize,
    /// Relative bound improvement over a full sweep below which the loop stops.
    pub rel_tol: f64,
    /// Gaussian randomization candidates per phase update.
    pub randomization_count: usize,
    /// Fresh phase initializations tried after the first one fails.
    pub init_retries: usize,
    /// Run seed; every random stream of the run derives from it.
    pub seed: u64,
    /// Record every successful conic solve for external certification.
    pub certify: bool,
    /// Interior-point settings shared by all solves.
    pub solver: SolverOptions,
}

impl MaoParams {
    pub fn new(seed: u64) -> Self {
        MaoParams {
            max_sweeps: 20,
            rel_tol: 1e-3,
            randomization_count: 200,
            init_retries: 10,
            seed,
            certify: false,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MaoError {
    /// No random phase initialization yielded a feasible beamforming SDP.
    #[error("no feasible phase initialization after {attempts} attempts")]
    InfeasibleInit { attempts: usize },
    /// A conic solve failed mid-run.
    #[error("{stage} solve failed at sweep {sweep}, layer {layer}: {status:?}")]
    Solver {
        sweep: usize,
        layer: usize,
        stage: &'static str,
        status: SolveStatus,
    },
    #[error(transparent)]
    Subproblem(#[from] SubproblemError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

/// Exact scoring of one `(phase stack, beamformers)` configuration.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub crb: CrbReport,
    pub sinrs: Vec<f64>,
    /// `min_k 10·log10(SINR_k / Γ_k)`.
    pub min_margin_db: f64,
    pub power: f64,
    /// Every SINR threshold met within `1e-6` relative and the power budget
    /// within `1e-8` relative.
    pub feasible: bool,
}

/// Per-sweep progress record.
#[derive(Debug, Clone)]
pub struct SweepTrace {
    pub sweep: usize,
    pub crb: f64,
    pub min_margin_db: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Relative bound improvement over a full sweep fell below `rel_tol`.
    Converged,
    /// The sweep budget ran out first.
    SweepCap,
}

/// One recorded conic solve, kept for independent optimality certification.
#[derive(Debug)]
pub struct CertifiedSolve {
    pub label: String,
    pub problem: ConicProblem,
    pub solution: ConicSolution,
}

/// Output of [`mao_optimize`].
#[derive(Debug)]
pub struct MaoResult {
    pub stack: PhaseStack,
    pub solution: BeamformingSolution,
    pub evaluation: Evaluation,
    /// Best bound after initialization and after each sweep; nonincreasing.
    pub best_crb: Vec<f64>,
    pub trace: Vec<SweepTrace>,
    pub sweeps: usize,
    pub termination: Termination,
    pub init_attempts: usize,
    /// Every recorded solve when `certify` is set, else empty.
    pub certified: Vec<CertifiedSolve>,
}

/// Scores a configuration with the exact cascade: true bound, per-user SINRs,
/// transmit power, and the feasibility verdict the safeguard acts on.
pub fn evaluate_configuration(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    solution: &BeamformingSolution,
) -> Evaluation {
    let p = end_to_end_matrix(stack, &channels.omega).expect("stack matches the diffraction set");
    let r_ie = linalg::hermitize(&solution.block_covariance());
    let crb = metrics::crb_extended(
        &p,
        &channels.g,
        &r_ie,
        scenario.radar_noise,
        scenario.symbols_per_block,
    )
    .expect("scenario invariants hold");

    let sinrs: Vec<f64> = (0..scenario.users())
        .map(|k| {
            metrics::sinr_user(
                k,
                &p,
                channels,
                &solution.beamformers,
                &solution.sensing_covariance_opt,
                scenario.user_noise[k],
            )
        })
        .collect();
    let mut min_margin_db = f64::INFINITY;
    let mut sinr_ok = true;
    for (sinr, gamma) in sinrs.iter().zip(&scenario.sinr_thresholds) {
        min_margin_db = min_margin_db.min(10.0 * (sinr / gamma).log10());
        if *sinr < gamma * (1.0 - 1e-6) {
            sinr_ok = false;
        }
    }
    let power = metrics::total_power(&solution.beamformers, &solution.sensing_covariance_opt);
    let power_ok = power <= scenario.total_power * (1.0 + 1e-8);

    Evaluation {
        crb,
        sinrs,
        min_margin_db,
        power,
        feasible: sinr_ok && power_ok,
    }
}

struct BeamformingStep {
    solution: BeamformingSolution,
    problem: ConicProblem,
    conic: ConicSolution,
}

enum StepFailure {
    Status(SolveStatus),
    Recovery(SubproblemError),
    Invalid(MetricsError),
}

impl StepFailure {
    fn at(self, sweep: usize, layer: usize, stage: &'static str) -> MaoError {
        match self {
            StepFailure::Status(status) => MaoError::Solver {
                sweep,
                layer,
                stage,
                status,
            },
            StepFailure::Recovery(error) => MaoError::Subproblem(error),
            StepFailure::Invalid(error) => MaoError::Metrics(error),
        }
    }
}

/// Solves the covariance SDP at fixed phases and recovers validated
/// rank-one beamformers from it.
fn beamforming_step(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    ctx: &LayerContext,
    options: &SolverOptions,
) -> Result<BeamformingStep, StepFailure> {
    let sdp = assemble_beamforming_sdp(scenario, channels, stack, ctx);
    let conic = sdp.problem.solve(options);
    if !conic.status.is_solved() {
        return Err(StepFailure::Status(conic.status.clone()));
    }
    let (covariances, sensing) = sdp.extract_covariances(&conic);
    let solution = recover_beamformers(&covariances, &sensing, &sdp.effective_channels)
        .map_err(StepFailure::Recovery)?;
    solution
        .validate(scenario.total_power)
        .map_err(StepFailure::Invalid)?;
    Ok(BeamformingStep {
        solution,
        problem: sdp.problem,
        conic,
    })
}

/// Runs the full safeguarded alternation and returns the best configuration
/// found. The layer count and width are taken from the channel set, so
/// hand-built instances work the same as geometry-derived ones.
pub fn mao_optimize(
    scenario: &Scenario,
    channels: &ChannelSet,
    params: &MaoParams,
) -> Result<MaoResult, MaoError> {
    let layers = channels.omega.count() + 1;
    let atoms = channels.g.nrows();
    let top = layers - 1;

    let mut certified = Vec::new();

    // Fresh uniform phases until the user-facing-layer SDP is feasible and
    // the recovered beamformers check out.
    let mut init = None;
    let mut init_attempts = 0;
    for attempt in 0..=params.init_retries {
        init_attempts = attempt + 1;
        let mut rng = stream_rng(params.seed, Stream::PhaseInit(attempt));
        let stack = PhaseStack::uniform_random(layers, atoms, &mut rng);
        let ctx = LayerContext::new(top, &stack, channels)?;
        if let Ok(step) = beamforming_step(scenario, channels, &stack, &ctx, &params.solver) {
            let evaluation = evaluate_configuration(scenario, channels, &stack, &step.solution);
            if !evaluation.feasible {
                continue;
            }
            if params.certify {
                certified.push(CertifiedSolve {
                    label: format!("init attempt {attempt} beamforming"),
                    problem: step.problem,
                    solution: step.conic,
                });
            }
            init = Some((stack, step.solution, evaluation));
            break;
        }
    }
    let Some((mut stack, mut solution, mut evaluation)) = init else {
        return Err(MaoError::InfeasibleInit {
            attempts: init_attempts,
        });
    };

    let mut best_crb = vec![evaluation.crb.crb];
    let mut trace = Vec::new();
    let mut termination = Termination::SweepCap;
    let mut sweeps = 0;

    for sweep in 1..=params.max_sweeps {
        let sweep_start = evaluation.crb.crb;
        for layer in (0..layers).rev() {
            let ctx = LayerContext::new(layer, &stack, channels)?;
            let step = beamforming_step(scenario, channels, &stack, &ctx, &params.solver)
                .map_err(|failure| failure.at(sweep, layer, "beamforming"))?;
            let candidate_bf = step.solution;
            if params.certify {
                certified.push(CertifiedSolve {
                    label: format!("sweep {sweep} layer {layer} beamforming"),
                    problem: step.problem,
                    solution: step.conic,
                });
            }

            // Phase relaxation; if the solve fails the layer keeps its profile.
            let sdr = assemble_phase_sdr(scenario, channels, &ctx, &candidate_bf);
            let sdr_solution = sdr.problem.solve(&params.solver);
            let mut candidate_stack = stack.clone();
            if sdr_solution.status.is_solved() {
                let mut rng = stream_rng(params.seed, Stream::Randomization { sweep, layer });
                let outcome = randomize_phases(
                    scenario,
                    channels,
                    &stack,
                    layer,
                    &candidate_bf,
                    &sdr,
                    &sdr_solution,
                    params.randomization_count,
                    &mut rng,
                );
                candidate_stack = stack.with_layer(layer, &outcome.angles)?;
                if params.certify {
                    certified.push(CertifiedSolve {
                        label: format!("sweep {sweep} layer {layer} phase"),
                        problem: sdr.problem,
                        solution: sdr_solution,
                    });
                }
            }

            // Joint safeguard: accept the (beamformers, profile) pair only if
            // it is feasible and the exact bound does not regress.
            let candidate_eval =
                evaluate_configuration(scenario, channels, &candidate_stack, &candidate_bf);
            if candidate_eval.feasible && candidate_eval.crb.crb <= evaluation.crb.crb {
                stack = candidate_stack;
                solution = candidate_bf;
                evaluation = candidate_eval;
            }
        }
        sweeps = sweep;
        let previous = *best_crb.last().expect("trace starts at initialization");
        assert!(
            evaluation.crb.crb <= previous,
            "safeguard must keep the bound nonincreasing"
        );
        best_crb.push(evaluation.crb.crb);
        trace.push(SweepTrace {
            sweep,
            crb: evaluation.crb.crb,
            min_margin_db: evaluation.min_margin_db,
            power: evaluation.power,
        });

        let improvement = if sweep_start.is_infinite() {
            // An inestimable bound stays infinite no matter the iterate; stop
            // as soon as a sweep leaves it there.
            if evaluation.crb.crb.is_infinite() {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (sweep_start - evaluation.crb.crb) / sweep_start.abs().max(f64::MIN_POSITIVE)
        };
        if improvement < params.rel_tol {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(MaoResult {
        stack,
        solution,
        evaluation,
        best_crb,
        trace,
        sweeps,
        termination,
        init_attempts,
        certified,
    })
}
