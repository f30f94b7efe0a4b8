//! Independent validation oracles.
//!
//! Everything here re-derives a result through a second code path and
//! compares it against the main pipeline, so that the pipeline can be
//! trusted at scales where no closed form exists:
//!
//! * [`kkt_check`] recomputes primal feasibility, dual feasibility,
//!   complementarity, and the duality gap of a conic solve directly from the
//!   problem statement, ignoring the solver's own bookkeeping.
//! * [`recompute_diffraction`] evaluates the inter-layer coupling with naive
//!   loops and hand-rolled complex arithmetic and reports the worst
//!   deviation from the production matrix.
//! * [`brute_force_joint`] enumerates a full phase grid, solving the
//!   beamforming SDP at every profile, and returns the exact quantized
//!   optimum of the joint design.
//! * [`brute_force_covariance`] minimizes the single-user beamforming
//!   surrogate over a direct parameterization of 2×2 transmit covariances by
//!   refined grid search, bypassing the conic machinery entirely.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{ChannelSet, Scenario};
use crate::conic::{ConicProblem, ConicSolution, Sense, SolverOptions, VarId};
use crate::linalg;
use crate::metrics;
use crate::propagation::{diffraction_matrix, end_to_end_matrix, PhaseStack, SimGeometry};
use crate::subproblems::{assemble_beamforming_sdp, LayerContext, SubproblemError};
use crate::CMat;

/// Residual threshold for [`kkt_check`].
pub const KKT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid has {configs} profiles, above the 2^24 enumeration guard")]
    SearchTooLarge { configs: u128 },
    #[error("phase grid needs at least 2 points per element, got {0}")]
    DegenerateGrid(usize),
    #[error(transparent)]
    Subproblem(#[from] SubproblemError),
}

// ---------------------------------------------------------------------------
// Optimality certification.

/// Independently recomputed optimality residuals of one conic solve, all
/// relative; the solve passes when every residual is at most [`KKT_TOL`].
#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    /// Worst constraint violation.
    pub primal: f64,
    /// Worst dual infeasibility: negative eigenvalue of a recomputed slack
    /// `Z_v = C_v − Σ_i y_i A_{i,v}`, negative eigenvalue of a primal value,
    /// or a multiplier on the wrong side of its sign constraint.
    pub dual: f64,
    /// Worst complementarity defect, over `⟨X_v, Z_v⟩` per variable and
    /// `y_i · slack_i` per inequality constraint.
    pub complementarity: f64,
    /// Recomputed primal-dual objective gap.
    pub gap: f64,
    pub pass: bool,
}

/// Recomputes the optimality conditions of `solution` from the problem
/// statement alone: constraint values from the stored variable values, dual
/// slacks from the objective and multipliers, and both objectives from
/// scratch. Nothing is read from the solver's residual bookkeeping.
pub fn kkt_check(problem: &ConicProblem, solution: &ConicSolution) -> KktReport {
    let (objective, offset) = problem.objective();
    let values = &solution.values;

    // Every variable that carries cost or appears in a constraint gets a
    // recomputed dual slack; untouched variables have Z = 0, which is
    // trivially feasible and complementary.
    let mut slacks: HashMap<VarId, CMat> = HashMap::new();
    for (var, coeff) in &objective.terms {
        let entry = slacks
            .entry(*var)
            .or_insert_with(|| CMat::zeros(coeff.nrows(), coeff.ncols()));
        *entry += coeff;
    }

    let mut primal = 0.0_f64;
    let mut dual = 0.0_f64;
    let mut complementarity = 0.0_f64;
    for (i, constraint) in problem.constraints().iter().enumerate() {
        let y = solution.duals[i];
        let value = constraint.lhs.evaluate(values);
        let scale = 1.0 + constraint.rhs.abs();
        let violation = match constraint.sense {
            Sense::Eq => (value - constraint.rhs).abs(),
            Sense::Le => (value - constraint.rhs).max(0.0),
            Sense::Ge => (constraint.rhs - value).max(0.0),
        };
        primal = primal.max(violation / scale);

        let sign_violation = match constraint.sense {
            Sense::Eq => 0.0,
            Sense::Le => y.max(0.0),
            Sense::Ge => (-y).max(0.0),
        };
        dual = dual.max(sign_violation / (1.0 + y.abs()));
        if constraint.sense != Sense::Eq {
            let defect = (y * (value - constraint.rhs)).abs();
            complementarity = complementarity.max(defect / (1.0 + y.abs() * scale));
        }

        for (var, coeff) in &constraint.lhs.terms {
            let entry = slacks
                .entry(*var)
                .or_insert_with(|| CMat::zeros(coeff.nrows(), coeff.ncols()));
            *entry -= coeff * Complex64::new(y, 0.0);
        }
    }

    for (var, z) in &slacks {
        let x = solution.value(*var);
        let z = linalg::hermitize(z);
        let x_scale = linalg::frob(x);
        let z_scale = linalg::frob(&z);
        dual = dual.max((-linalg::min_eig(&z)).max(0.0) / (1.0 + z_scale));
        dual = dual.max((-linalg::min_eig(&linalg::hermitize(x))).max(0.0) / (1.0 + x_scale));
        let inner = (&z * x).diagonal().iter().map(|c| c.re).sum::<f64>();
        complementarity = complementarity.max(inner.abs() / (1.0 + x_scale * z_scale));
    }

    let primal_objective = objective.evaluate(values) + offset;
    let dual_objective = problem
        .constraints()
        .iter()
        .enumerate()
        .map(|(i, c)| solution.duals[i] * c.rhs)
        .sum::<f64>()
        + offset;
    let gap = (primal_objective - dual_objective).abs()
        / (1.0 + primal_objective.abs().max(dual_objective.abs()));

    let pass =
        primal <= KKT_TOL && dual <= KKT_TOL && complementarity <= KKT_TOL && gap <= KKT_TOL;
    KktReport {
        primal,
        dual,
        complementarity,
        gap,
        pass,
    }
}

// ---------------------------------------------------------------------------
// Diffraction recomputation.

/// Naive re-evaluation of the inter-layer coupling matrix with raw loops and
/// `(re, im)` pair arithmetic; returns the largest entrywise modulus of the
/// difference from the production matrix. Single-layer geometries have no
/// coupling and report zero.
pub fn recompute_diffraction(geom: &SimGeometry) -> f64 {
    if geom.layers < 2 {
        return 0.0;
    }
    let produced = diffraction_matrix(geom).expect("geometry was validated at construction");
    let n = geom.atoms_per_layer;
    let side = (n as f64).sqrt().round() as usize;
    let spacing = geom.thickness / (geom.layers - 1) as f64;

    let mut worst = 0.0_f64;
    for dest in 0..n {
        for source in 0..n {
            let dx = (dest / side) as f64 - (source / side) as f64;
            let dy = (dest % side) as f64 - (source % side) as f64;
            let (re, im) = naive_coefficient(
                geom.atom_area,
                geom.wavelength,
                spacing,
                dx * geom.atom_pitch,
                dy * geom.atom_pitch,
            );
            let got = produced[(dest, source)];
            let dre = got.re - re;
            let dim = got.im - im;
            worst = worst.max((dre * dre + dim * dim).sqrt());
        }
    }
    worst
}

/// One coupling coefficient, written out longhand:
/// `A·cosχ/r · (1/(2πr) − j/λ) · e^{j2πr/λ}` with `cosχ = axial/r`.
fn naive_coefficient(
    area: f64,
    wavelength: f64,
    axial: f64,
    lateral_x: f64,
    lateral_y: f64,
) -> (f64, f64) {
    let r = (axial * axial + lateral_x * lateral_x + lateral_y * lateral_y).sqrt();
    let amplitude = area * (axial / r) / r;
    let inv_radial = 1.0 / (std::f64::consts::TAU * r);
    let inv_lambda = 1.0 / wavelength;
    let theta = std::f64::consts::TAU * r / wavelength;
    let (sin, cos) = theta.sin_cos();
    // (a − j·b)(cosθ + j·sinθ) = (a·cosθ + b·sinθ) + j(a·sinθ − b·cosθ).
    (
        amplitude * (inv_radial * cos + inv_lambda * sin),
        amplitude * (inv_radial * sin - inv_lambda * cos),
    )
}

// ---------------------------------------------------------------------------
// Joint brute force.

/// Phase quantization for the exhaustive joint search: each element ranges
/// over `2πk/points_per_element`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub points_per_element: usize,
}

/// Exact quantized optimum of the joint design.
#[derive(Debug, Clone)]
pub struct JointOptimum {
    pub crb: f64,
    pub stack: PhaseStack,
    pub feasible_profiles: usize,
    pub total_profiles: u128,
}

/// Enumerates every phase profile on the grid, solves the user-facing-layer
/// beamforming SDP at each, and returns the feasible profile with the best
/// exact bound — or `None` when no profile admits a feasible beamforming
/// solution. Ties keep the lexicographically first profile (element 0 is the
/// most significant digit of the enumeration).
pub fn brute_force_joint(
    scenario: &Scenario,
    channels: &ChannelSet,
    grid: GridSpec,
) -> Result<Option<JointOptimum>, OracleError> {
    let points = grid.points_per_element;
    if points < 2 {
        return Err(OracleError::DegenerateGrid(points));
    }
    let layers = channels.omega.count() + 1;
    let atoms = channels.g.nrows();
    let cells = layers * atoms;
    let total = (points as u128)
        .checked_pow(cells as u32)
        .unwrap_or(u128::MAX);
    if total > 1 << 24 {
        return Err(OracleError::SearchTooLarge { configs: total });
    }

    let step = std::f64::consts::TAU / points as f64;
    let options = SolverOptions::default();
    let mut indices = vec![0usize; cells];
    let mut best: Option<JointOptimum> = None;
    let mut feasible_profiles = 0usize;
    loop {
        let angles: Vec<Vec<f64>> = (0..layers)
            .map(|l| {
                indices[l * atoms..(l + 1) * atoms]
                    .iter()
                    .map(|i| *i as f64 * step)
                    .collect()
            })
            .collect();
        let stack = PhaseStack::from_angles(angles).expect("grid profiles are well-formed");

        let ctx = LayerContext::new(layers - 1, &stack, channels)?;
        let sdp = assemble_beamforming_sdp(scenario, channels, &stack, &ctx);
        let solution = sdp.problem.solve(&options);
        if solution.status.is_solved() {
            feasible_profiles += 1;
            let (covariances, sensing) = sdp.extract_covariances(&solution);
            let mut r_ie = sensing;
            for cov in &covariances {
                r_ie += cov;
            }
            let p = end_to_end_matrix(&stack, &channels.omega)
                .expect("stack matches the diffraction set");
            let report = metrics::crb_extended(
                &p,
                &channels.g,
                &linalg::hermitize(&r_ie),
                scenario.radar_noise,
                scenario.symbols_per_block,
            )
            .expect("scenario invariants hold");
            if best.as_ref().is_none_or(|b| report.crb < b.crb) {
                best = Some(JointOptimum {
                    crb: report.crb,
                    stack,
                    feasible_profiles: 0,
                    total_profiles: total,
                });
            }
        }

        // Odometer with element 0 most significant.
        let mut done = true;
        for digit in (0..cells).rev() {
            indices[digit] += 1;
            if indices[digit] < points {
                done = false;
                break;
            }
            indices[digit] = 0;
        }
        if done {
            break;
        }
    }
    if let Some(b) = best.as_mut() {
        b.feasible_profiles = feasible_profiles;
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Covariance brute force.

/// Grid-refined minimization of the single-user beamforming surrogate
/// `tr((G R G^H)^{-1})` over 2×2 transmit covariances `R` with
/// `h^H R h ≥ Γσ²` and `tr R ≤ P0`, for single-layer instances, where the
/// feasible covariances are exactly those splittable into a user beam and a
/// sensing part meeting the SINR threshold. The covariance is parameterized
/// directly — diagonal `(x₁, x₂)`, correlation magnitude `ρ ∈ [0, 1]`, and
/// correlation phase — so every evaluated point is PSD by construction, and
/// the search never touches the conic machinery. Returns the best objective
/// found, or `None` when no grid point is feasible.
pub fn brute_force_covariance(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    refinements: usize,
) -> Option<f64> {
    assert_eq!(channels.omega.count(), 0, "single-layer instances only");
    assert_eq!(channels.g.nrows(), 2, "two-antenna instances only");
    assert_eq!(scenario.users(), 1, "single-user instances only");

    // h = h_d + G^H Φ^H h_r, written out directly from the raw channels.
    let n = channels.g.nrows();
    let mut h = channels.h_d[0].clone();
    for m in 0..channels.g.ncols() {
        for i in 0..n {
            let phase = Complex64::from_polar(1.0, -stack.angle(0, i));
            h[m] += channels.g[(i, m)].conj() * phase * channels.h_r[0][i];
        }
    }
    let g = &channels.g;
    let p0 = scenario.total_power;
    let need = scenario.sinr_thresholds[0] * scenario.user_noise[0];

    let objective = |x1: f64, x2: f64, rho: f64, phase: f64| -> Option<f64> {
        let c = Complex64::from_polar(rho * (x1 * x2).sqrt(), phase);
        // Feasibility of R = [[x1, c], [c̄, x2]].
        if x1 + x2 > p0 * (1.0 + 1e-12) {
            return None;
        }
        let h0 = h[0];
        let h1 = h[1];
        let quad = x1 * h0.norm_sqr()
            + x2 * h1.norm_sqr()
            + 2.0 * (h0.conj() * c * h1).re;
        if quad < need * (1.0 - 1e-9) {
            return None;
        }
        // A = G R G^H for 2×2, then tr(A^{-1}) = tr(A) / det(A).
        let r = CMat::from_row_slice(2, 2, &[Complex64::new(x1, 0.0), c, c.conj(), Complex64::new(x2, 0.0)]);
        let a = g * r * g.adjoint();
        let trace = a[(0, 0)].re + a[(1, 1)].re;
        let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re;
        if det <= f64::MIN_POSITIVE {
            return None;
        }
        Some(trace / det)
    };

    const POINTS: usize = 9;
    let tau = std::f64::consts::TAU;
    let mut center = [p0 / 2.0, p0 / 2.0, 0.5, tau / 2.0];
    let mut span = [p0 / 2.0, p0 / 2.0, 0.5, tau / 2.0];
    let mut best: Option<(f64, [f64; 4])> = None;
    for _ in 0..=refinements {
        for i1 in 0..POINTS {
            for i2 in 0..POINTS {
                for ir in 0..POINTS {
                    for ip in 0..POINTS {
                        let frac = |i: usize| (i as f64 / (POINTS - 1) as f64) * 2.0 - 1.0;
                        let x1 = (center[0] + frac(i1) * span[0]).clamp(0.0, p0);
                        let x2 = (center[1] + frac(i2) * span[1]).clamp(0.0, p0);
                        let rho = (center[2] + frac(ir) * span[2]).clamp(0.0, 1.0);
                        let phase = center[3] + frac(ip) * span[3];
                        if let Some(value) = objective(x1, x2, rho, phase) {
                            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                                best = Some((value, [x1, x2, rho, phase]));
                            }
                        }
                    }
                }
            }
        }
        let Some((_, at)) = best else { return None };
        center = at;
        for s in &mut span {
            *s /= (POINTS - 1) as f64 / 2.0;
        }
    }
    best.map(|(value, _)| value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{AffineHermitian, LinComb, SolveStatus};
    use crate::fixtures::{desk_geometry, tiny_instance};
    use crate::subproblems::{assemble_phase_sdr, recover_beamformers};
    use crate::RVec;

    #[test]
    fn hand_built_optimal_pair_has_zero_residuals() {
        // min x subject to x ≥ 3: optimum x = 3, multiplier 1, slack 0.
        let mut problem = ConicProblem::new();
        let x = problem.add_scalar();
        problem.add_objective_scalar(x, 1.0);
        problem.add_constraint(
            LinComb::new().scalar_term(x, 1.0),
            Sense::Ge,
            3.0,
            "floor",
        );
        let solution = ConicSolution {
            status: SolveStatus::Optimal,
            values: vec![CMat::from_element(1, 1, Complex64::new(3.0, 0.0))],
            duals: RVec::from_vec(vec![1.0]),
            dual_slacks: vec![CMat::zeros(1, 1)],
            objective: 3.0,
            residuals: crate::conic::Residuals { primal: 0.0, dual: 0.0, gap: 0.0 },
            iterations: 0,
        };
        let report = kkt_check(&problem, &solution);
        assert!(report.pass);
        assert_eq!(report.primal, 0.0);
        assert_eq!(report.dual, 0.0);
        assert_eq!(report.complementarity, 0.0);
        assert_eq!(report.gap, 0.0);
    }

    #[test]
    fn perturbed_solution_fails_certification() {
        let mut problem = ConicProblem::new();
        let x = problem.add_hermitian(2);
        problem.add_objective_trace(x, CMat::identity(2, 2));
        problem.add_constraint(
            LinComb::new().trace_term(x, CMat::from_element(2, 2, Complex64::new(1.0, 0.0))),
            Sense::Ge,
            2.0,
            "coupling",
        );
        let solution = problem.solve(&SolverOptions::default());
        assert!(kkt_check(&problem, &solution).pass);

        let mut doctored = solution.clone();
        doctored.values[0][(0, 0)] += Complex64::new(1e-3, 0.0);
        let report = kkt_check(&problem, &doctored);
        assert!(!report.pass);
        assert!(report.complementarity > KKT_TOL || report.gap > KKT_TOL);
    }

    #[test]
    fn pipeline_solves_pass_certification() {
        let (scenario, channels) = tiny_instance(3, 2.0);
        let stack = PhaseStack::zeros(1, 2);
        let ctx = LayerContext::new(0, &stack, &channels).unwrap();
        let sdp = assemble_beamforming_sdp(&scenario, &channels, &stack, &ctx);
        let solution = sdp.problem.solve(&SolverOptions::default());
        assert!(solution.status.is_solved());
        let report = kkt_check(&sdp.problem, &solution);
        assert!(
            report.pass,
            "beamforming: primal {:.2e} dual {:.2e} comp {:.2e} gap {:.2e}",
            report.primal, report.dual, report.complementarity, report.gap
        );

        let (covariances, sensing) = sdp.extract_covariances(&solution);
        let recovered =
            recover_beamformers(&covariances, &sensing, &sdp.effective_channels).unwrap();
        let sdr = assemble_phase_sdr(&scenario, &channels, &ctx, &recovered);
        let sdr_solution = sdr.problem.solve(&SolverOptions::default());
        assert!(sdr_solution.status.is_solved());
        let report = kkt_check(&sdr.problem, &sdr_solution);
        assert!(
            report.pass,
            "phase relaxation: primal {:.2e} dual {:.2e} comp {:.2e} gap {:.2e}",
            report.primal, report.dual, report.complementarity, report.gap
        );
    }

    #[test]
    fn epigraph_certificate_holds_for_constant_operand() {
        // tr(X^{-1}) of a fixed diagonal: the epigraph solve must agree with
        // the direct inverse and pass certification.
        let mut problem = ConicProblem::new();
        let fixed = CMat::from_diagonal(&crate::CVec::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(4.0, 0.0),
        ]));
        let _ = problem.add_trace_inverse_epigraph(&AffineHermitian::constant(fixed), 1.0);
        let solution = problem.solve(&SolverOptions::default());
        assert!(solution.status.is_solved());
        assert!((solution.objective - 1.75).abs() <= 1e-6 * 1.75);
        assert!(kkt_check(&problem, &solution).pass);
    }

    #[test]
    fn naive_diffraction_agrees_with_production() {
        for layers in [2, 3, 5] {
            let geom = desk_geometry(layers);
            let deviation = recompute_diffraction(&geom);
            assert!(deviation <= 1e-12, "L = {layers}: {deviation:.2e}");
        }
        let skewed = SimGeometry::with_pitch_and_area(3, 9, 0.031, 0.2, 0.011, 1.7e-4).unwrap();
        assert!(recompute_diffraction(&skewed) <= 1e-12);
    }

    #[test]
    fn single_layer_geometry_has_nothing_to_compare() {
        assert_eq!(recompute_diffraction(&desk_geometry(1)), 0.0);
    }

    #[test]
    fn on_axis_coefficient_matches_hand_value() {
        // Unit wavelength, unit spacing, quarter-unit area, zero offset:
        // ω = 0.25·(1/(2π) − j)·e^{j2π} = 0.039788735772973836 − 0.25j.
        let geom = SimGeometry::with_pitch_and_area(2, 1, 1.0, 1.0, 0.5, 0.25).unwrap();
        let produced = diffraction_matrix(&geom).unwrap()[(0, 0)];
        let (re, im) = naive_coefficient(0.25, 1.0, 1.0, 0.0, 0.0);
        assert!((re - 0.039788735772973836).abs() <= 1e-15);
        assert!((im + 0.25).abs() <= 1e-15);
        assert!((produced.re - re).abs() <= 1e-15);
        assert!((produced.im - im).abs() <= 1e-15);
    }

    #[test]
    fn doubling_wavelength_and_distances_quarters_the_coupling() {
        // With the aperture area held fixed, both the 1/(2πr²) and the 1/(λr)
        // parts of the amplitude scale by 1/4 while the phase is unchanged.
        let base = SimGeometry::with_pitch_and_area(2, 4, 1.0, 1.3, 0.6, 0.25).unwrap();
        let scaled = SimGeometry::with_pitch_and_area(2, 4, 2.0, 2.6, 1.2, 0.25).unwrap();
        let a = diffraction_matrix(&base).unwrap();
        let b = diffraction_matrix(&scaled).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = a[(i, j)] * 0.25;
                assert!((b[(i, j)] - expected).norm() <= 1e-15 * a[(i, j)].norm());
            }
        }
    }

    #[test]
    fn joint_search_finds_a_feasible_optimum() {
        let (scenario, channels) = tiny_instance(3, 2.0);
        let grid = GridSpec { points_per_element: 4 };
        let first = brute_force_joint(&scenario, &channels, grid).unwrap().unwrap();
        let second = brute_force_joint(&scenario, &channels, grid).unwrap().unwrap();
        assert!(first.crb.is_finite());
        assert!(first.feasible_profiles >= 1);
        assert_eq!(first.total_profiles, 16);
        assert_eq!(first.crb.to_bits(), second.crb.to_bits());
        assert_eq!(
            first.stack.layer_angles(0),
            second.stack.layer_angles(0)
        );
    }

    #[test]
    fn impossible_threshold_reports_no_feasible_profile() {
        let (scenario, channels) = tiny_instance(3, 1e9);
        let grid = GridSpec { points_per_element: 4 };
        assert!(brute_force_joint(&scenario, &channels, grid).unwrap().is_none());
    }

    #[test]
    fn enumeration_guard_rejects_oversized_grids() {
        let (scenario, channels) = tiny_instance(3, 2.0);
        let grid = GridSpec { points_per_element: 5000 };
        match brute_force_joint(&scenario, &channels, grid) {
            Err(OracleError::SearchTooLarge { configs }) => assert_eq!(configs, 25_000_000),
            other => panic!("expected the guard to fire, got {other:?}"),
        }
    }

    #[test]
    fn sdp_matches_direct_covariance_search_within_two_percent() {
        let (scenario, channels) = tiny_instance(3, 2.0);
        let stack = PhaseStack::zeros(1, 2);
        let ctx = LayerContext::new(0, &stack, &channels).unwrap();
        let sdp = assemble_beamforming_sdp(&scenario, &channels, &stack, &ctx);
        let solution = sdp.problem.solve(&SolverOptions::default());
        assert!(solution.status.is_solved());
        let surrogate = sdp.surrogate_value(&solution);

        let brute = brute_force_covariance(&scenario, &channels, &stack, 8).unwrap();
        let rel = (brute - surrogate).abs() / surrogate;
        assert!(
            rel <= 0.02,
            "surrogate {surrogate:.6e} vs direct search {brute:.6e} (rel {rel:.2e})"
        );
        // The search only visits feasible covariances, so it can never beat
        // the exact optimum by more than its own resolution.
        assert!(brute >= surrogate * (1.0 - 1e-6));
    }
}
