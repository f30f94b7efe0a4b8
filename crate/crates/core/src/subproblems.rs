//! The two convexified subproblems of the alternating optimizer.
//!
//! With every layer but `ℓ` frozen, the cascade factors as `P = B_ℓ Φ_ℓ A_ℓ`
//! and both stages of the sweep become conic programs:
//!
//! * **Beamforming.** For fixed phases, minimizing the waveform factor of the
//!   CRB over `{W̃_k, R_0}` is an SDP: the factor `tr((F R_ie F^H)^{-1})`
//!   with `F = A_ℓ G` enters through a matrix epigraph, the SINR constraints
//!   are linear in the covariances, and rank-one beamformers are recovered
//!   exactly afterwards, with the residual covariance folded back into the
//!   sensing part so the block covariance — and hence every SINR and the
//!   CRB — is preserved.
//!
//! * **Phases.** For fixed beamformers, each received power is a quadratic
//!   `|c + u^H t|²` in the conjugated layer response `u`, lifted to
//!   `ũ ũ^H` with `ũ = [u; 1]`. The semidefinite relaxation maximizes the
//!   smallest scaled SINR margin subject to a unit diagonal; Gaussian
//!   randomization projects samples of the optimal covariance back to unit
//!   modulus and keeps the best candidate, never doing worse than the
//!   incumbent profile, which always competes.
//!
//! Variables are normalized to the power budget and rows to unit scale
//! before entering the solver; the budget spans many orders of magnitude
//! against the noise floors, and the interior-point method is fed O(1) data.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::channel::{ChannelSet, Scenario};
use crate::conic::{
    AffineHermitian, ConicProblem, ConicSolution, LinComb, Sense, SolveStatus, VarId,
};
use crate::linalg;
use crate::metrics::{self, BeamformingSolution};
use crate::propagation::{cascade_split, end_to_end_matrix, PhaseStack};
use crate::rng::complex_normal;
use crate::{CMat, CVec};

#[derive(Debug, Error)]
pub enum SubproblemError {
    #[error("layer {layer} split disagrees with the end-to-end channel (relative error {error:.2e})")]
    ChannelInconsistent { layer: usize, error: f64 },
    #[error("{stage} solve did not reach an optimum: {status:?}")]
    Solver { stage: &'static str, status: SolveStatus },
    #[error("covariance of user {user} carries no power toward its channel")]
    Extraction { user: usize },
    #[error("codebook search would enumerate {configs} configurations")]
    SearchTooLarge { configs: u128 },
}

/// Frozen-cascade view at one layer: `P = B Φ_ℓ A`, the surrogate aperture
/// `F = A G`, and per-user rows `g_k` with `h_r,k^H B = g_k^T`.
#[derive(Debug, Clone)]
pub struct LayerContext {
    pub layer: usize,
    pub a: CMat,
    pub b: CMat,
    pub f: CMat,
    pub g_rows: Vec<CVec>,
}

impl LayerContext {
    pub fn new(
        layer: usize,
        stack: &PhaseStack,
        channels: &ChannelSet,
    ) -> Result<Self, SubproblemError> {
        let (a, b) = cascade_split(stack, &channels.omega, layer)
            .expect("stack and diffraction set are consistent");
        let f = &a * &channels.g;
        // g_k^T = h_r,k^H B, so g_k = conj(B^H h_r,k).
        let g_rows: Vec<CVec> = channels
            .h_r
            .iter()
            .map(|h_r| (b.adjoint() * h_r).map(|c| c.conj()))
            .collect();

        // The factored effective channel must reproduce the end-to-end one.
        let p = end_to_end_matrix(stack, &channels.omega)
            .expect("stack and diffraction set are consistent");
        let ctx = LayerContext { layer, a, b, f, g_rows };
        for k in 0..channels.h_d.len() {
            let direct = metrics::effective_channel(k, &p, channels);
            let split = ctx.effective_channel(k, channels, &stack.layer_angles(layer));
            let err = (&split - &direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
            if err > 1e-12 {
                return Err(SubproblemError::ChannelInconsistent { layer, error: err });
            }
        }
        Ok(ctx)
    }

    /// Effective channel of user `k` through this split, for the given
    /// angles of the free layer: `h_k = h_d,k + (g_k^T Φ F)^H`.
    pub fn effective_channel(&self, k: usize, channels: &ChannelSet, angles: &[f64]) -> CVec {
        let n = self.g_rows[k].len();
        let mut row = CVec::zeros(n);
        for i in 0..n {
            row[i] = self.g_rows[k][i] * Complex64::from_polar(1.0, angles[i]);
        }
        &channels.h_d[k] + self.f.adjoint() * row.map(|c| c.conj())
    }
}

/// Assembled beamforming SDP together with the bookkeeping needed to map
/// the solution back to physical units.
#[derive(Debug, Clone)]
pub struct BeamformingSdp {
    pub problem: ConicProblem,
    pub w_vars: Vec<VarId>,
    pub r0_var: VarId,
    pub epigraph_var: VarId,
    /// Budget that variable units are expressed in.
    pub power_scale: f64,
    /// Divide the solved objective by this for the surrogate
    /// `tr((F R_ie F^H)^{-1})` in physical units.
    pub objective_scale: f64,
    /// Exact effective channels the SINR constraints were built from.
    pub effective_channels: Vec<CVec>,
}

impl BeamformingSdp {
    /// De-scaled `(W̃_k, R_0)` from a solved problem, hermitized. A solution
    /// accepted at finite residual can overshoot the budget by a sliver; the
    /// whole set is shrunk uniformly so downstream feasibility checks see a
    /// strictly admissible point.
    pub fn extract_covariances(&self, sol: &ConicSolution) -> (Vec<CMat>, CMat) {
        let mut covs: Vec<CMat> = self
            .w_vars
            .iter()
            .map(|&v| linalg::hermitize(sol.value(v)) * Complex64::new(self.power_scale, 0.0))
            .collect();
        let mut r0 = linalg::hermitize(sol.value(self.r0_var)) * Complex64::new(self.power_scale, 0.0);
        let total: f64 = covs.iter().chain(std::iter::once(&r0)).map(linalg::trace_re).sum();
        if total > self.power_scale {
            let shrink = Complex64::new(self.power_scale / total, 0.0);
            for w in &mut covs {
                *w *= shrink;
            }
            r0 *= shrink;
        }
        (covs, r0)
    }

    pub fn surrogate_value(&self, sol: &ConicSolution) -> f64 {
        sol.objective / self.objective_scale
    }
}

/// Build the beamforming SDP at the given layer: minimize the epigraph of
/// `tr((F (ΣW̃ + R_0) F^H)^{-1})` subject to per-user SINR thresholds and
/// the total power budget.
pub fn assemble_beamforming_sdp(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    ctx: &LayerContext,
) -> BeamformingSdp {
    let m = scenario.bs_antennas;
    let n = ctx.f.nrows();
    let k_users = scenario.users();
    let p0 = scenario.total_power;

    let p = end_to_end_matrix(stack, &channels.omega)
        .expect("stack and diffraction set are consistent");
    let effective: Vec<CVec> = (0..k_users)
        .map(|k| metrics::effective_channel(k, &p, channels))
        .collect();

    let mut problem = ConicProblem::new();
    let w_vars: Vec<VarId> = (0..k_users).map(|_| problem.add_hermitian(m)).collect();
    let r0_var = problem.add_hermitian(m);

    // SINR: (1 + 1/Γ_k) tr(H_k W̃_k) − tr(H_k (Σ W̃_i + R_0)) ≥ σ_k², with
    // H_k normalized to unit trace and the row divided by the budget.
    for k in 0..k_users {
        let h = &effective[k];
        let nu = h.norm_squared().max(f64::MIN_POSITIVE);
        let h_norm = CMat::from_fn(m, m, |i, j| h[i] * h[j].conj() / nu);
        let gamma = scenario.sinr_thresholds[k];
        let mut lhs = LinComb::new();
        for (i, &w) in w_vars.iter().enumerate() {
            let coeff = if i == k { 1.0 / gamma } else { -1.0 };
            lhs = lhs.trace_term(w, &h_norm * Complex64::new(coeff, 0.0));
        }
        lhs = lhs.trace_term(r0_var, &h_norm * Complex64::new(-1.0, 0.0));
        problem.add_constraint(
            lhs,
            Sense::Ge,
            scenario.user_noise[k] / (p0 * nu),
            format!("sinr user {k}"),
        );
    }

    // Total power in budget units.
    let mut power = LinComb::new();
    for &w in &w_vars {
        power = power.trace_term(w, linalg::eye(m));
    }
    power = power.trace_term(r0_var, linalg::eye(m));
    problem.add_constraint(power, Sense::Le, 1.0, "power budget");

    // Epigraph of the waveform CRB factor through the normalized aperture.
    // The pin scale estimates the epigraph optimum (`tr(X^{-1})` at a an
    // isotropic covariance) so the corner block solves near unit magnitude;
    // a badly conditioned cascade otherwise puts the optimum many orders
    // above the data scale, where the embedding loses the dual residual.
    // Both normalizations are constants, so the minimizer is untouched.
    let nu_f = (linalg::frob(&ctx.f).powi(2) / n as f64).max(f64::MIN_POSITIVE);
    let f_norm = &ctx.f * Complex64::new(1.0 / nu_f.sqrt(), 0.0);
    let (gram_eigs, _) = linalg::hermitian_eigen(&(&f_norm * f_norm.adjoint()));
    let spread: f64 = gram_eigs
        .iter()
        .map(|&l| if l > 1e-12 { 1.0 / l } else { 0.0 })
        .sum();
    let stretch = (m as f64 * spread).clamp(1.0, 1e12);
    let mut x = AffineHermitian::zero(n);
    for &w in &w_vars {
        x = x.congruence(w, f_norm.clone());
    }
    x = x.congruence(r0_var, f_norm.clone());
    let epigraph_var =
        problem.add_trace_inverse_epigraph_scaled(&x, 1.0, 1.0 / stretch.sqrt());

    BeamformingSdp {
        problem,
        w_vars,
        r0_var,
        epigraph_var,
        power_scale: p0,
        objective_scale: p0 * nu_f / stretch,
        effective_channels: effective,
    }
}

/// Exact rank-one recovery `w_k = (h_k^H W̃_k h_k)^{-1/2} W̃_k h_k`, with the
/// covariance remainders absorbed into the sensing part. The block
/// covariance, every SINR, and the CRB are unchanged by construction.
pub fn recover_beamformers(
    covariances: &[CMat],
    sensing_covariance: &CMat,
    effective_channels: &[CVec],
) -> Result<BeamformingSolution, SubproblemError> {
    let m = sensing_covariance.nrows();
    let mut beamformers = Vec::with_capacity(covariances.len());
    for (k, (cov, h)) in covariances.iter().zip(effective_channels).enumerate() {
        let q = cov * h;
        let power = h.dotc(&q).re;
        let scale = linalg::trace_re(cov).max(0.0) * h.norm_squared();
        if power <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(SubproblemError::Extraction { user: k });
        }
        beamformers.push(q / Complex64::new(power.sqrt(), 0.0));
    }
    let mut opt = sensing_covariance.clone();
    for cov in covariances {
        opt += cov;
    }
    for w in &beamformers {
        for i in 0..m {
            for j in 0..m {
                opt[(i, j)] -= w[i] * w[j].conj();
            }
        }
    }
    Ok(BeamformingSolution {
        covariances: covariances.to_vec(),
        sensing_covariance: sensing_covariance.clone(),
        beamformers,
        sensing_covariance_opt: linalg::hermitize(&opt),
    })
}

/// Assembled phase relaxation together with the quadratic forms needed to
/// score candidates in physical units.
#[derive(Debug, Clone)]
pub struct PhaseSdr {
    pub problem: ConicProblem,
    pub v_var: VarId,
    pub rho_vars: Vec<VarId>,
    /// Signal form `Q_{k,k}` per user.
    pub q_signal: Vec<CMat>,
    /// Total received form `T_k = Σ_i Q_{k,i} + Σ_j Q⁰_{k,j}` per user.
    pub q_total: Vec<CMat>,
    /// Margin row scales `ν_k`.
    pub row_scales: Vec<f64>,
}

impl PhaseSdr {
    /// Quadratic margin of user `k` at lifted vector `ũ`, in watts:
    /// `(1 + 1/Γ_k) ũ^H Q_kk ũ − ũ^H T_k ũ − σ_k²`.
    pub fn quadratic_margin(&self, scenario: &Scenario, k: usize, u_tilde: &CVec) -> f64 {
        let gamma = scenario.sinr_thresholds[k];
        let signal = (&self.q_signal[k] * u_tilde).dotc(u_tilde).re;
        let total = (&self.q_total[k] * u_tilde).dotc(u_tilde).re;
        (1.0 + 1.0 / gamma) * signal - total - scenario.user_noise[k]
    }
}

/// Lifted quadratic form of one received power: `|c + u^H t|² = ũ^H Q ũ`.
fn lifted_form(t: &CVec, c: Complex64) -> CMat {
    let n = t.len();
    let mut q = CMat::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = t[i] * t[j].conj();
        }
        q[(i, n)] = c.conj() * t[i];
        q[(n, i)] = c * t[i].conj();
    }
    q[(n, n)] = Complex64::new(c.norm_sqr(), 0.0);
    q
}

/// Build the per-layer phase relaxation for fixed beamformers: maximize
/// `Σ_k ϱ_k` over `V ⪰ 0`, `diag(V) = 1`, with each scaled SINR margin at
/// least `ϱ_k ≥ 0`.
pub fn assemble_phase_sdr(
    scenario: &Scenario,
    channels: &ChannelSet,
    ctx: &LayerContext,
    solution: &BeamformingSolution,
) -> PhaseSdr {
    let n = ctx.f.nrows();
    let k_users = scenario.users();

    // Pseudo-beamformers carrying the sensing covariance, so every term of
    // the denominator is one lifted quadratic form.
    let pseudo: Vec<CVec> = linalg::psd_eigen_pairs(&solution.sensing_covariance_opt)
        .into_iter()
        .filter(|(weight, _)| *weight > 0.0)
        .map(|(weight, vector)| vector * Complex64::new(weight.sqrt(), 0.0))
        .collect();

    let mut q_signal = Vec::with_capacity(k_users);
    let mut q_total = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let g = &ctx.g_rows[k];
        let form = |w: &CVec| -> CMat {
            let fw = &ctx.f * w;
            let t = CVec::from_fn(n, |i, _| g[i] * fw[i]);
            let c = channels.h_d[k].dotc(w);
            lifted_form(&t, c)
        };
        let mut total = CMat::zeros(n + 1, n + 1);
        for w in solution.beamformers.iter().chain(&pseudo) {
            total += form(w);
        }
        q_signal.push(form(&solution.beamformers[k]));
        q_total.push(linalg::hermitize(&total));
    }

    let mut problem = ConicProblem::new();
    let v_var = problem.add_hermitian(n + 1);
    let rho_vars: Vec<VarId> = (0..k_users).map(|_| problem.add_scalar()).collect();
    for &rho in &rho_vars {
        problem.add_objective_scalar(rho, -1.0);
    }
    for i in 0..=n {
        let mut e = CMat::zeros(n + 1, n + 1);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        problem.add_constraint(
            LinComb::new().trace_term(v_var, e),
            Sense::Eq,
            1.0,
            format!("unit modulus {i}"),
        );
    }
    let mut row_scales = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let gamma = scenario.sinr_thresholds[k];
        let nu = linalg::trace_re(&q_total[k]).max(scenario.user_noise[k]).max(f64::MIN_POSITIVE);
        row_scales.push(nu);
        let coeff = linalg::hermitize(
            &(&q_signal[k] * Complex64::new((1.0 + 1.0 / gamma) / nu, 0.0)
                - &q_total[k] * Complex64::new(1.0 / nu, 0.0)),
        );
        let lhs = LinComb::new().trace_term(v_var, coeff).scalar_term(rho_vars[k], -1.0);
        problem.add_constraint(
            lhs,
            Sense::Ge,
            scenario.user_noise[k] / nu,
            format!("margin user {k}"),
        );
    }

    PhaseSdr { problem, v_var, rho_vars, q_signal, q_total, row_scales }
}

/// Outcome of one phase stage: the chosen layer angles and how they scored.
#[derive(Debug, Clone)]
pub struct PhaseStageOutcome {
    pub angles: Vec<f64>,
    /// Smallest `SINR_k / Γ_k` of the chosen candidate, in dB.
    pub min_margin_db: f64,
    /// Relaxation bound `Σ_k ϱ_k` (scaled units).
    pub sdr_objective: f64,
    /// The relaxation bound dominates the chosen candidate's scaled margins
    /// whenever those are all nonnegative; recorded for certification.
    pub dominance_ok: bool,
    /// The chosen candidate strictly beat the incumbent profile.
    pub improved: bool,
}

/// Score a full candidate: exact SINR margins through the true cascade.
fn score_candidate(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    layer: usize,
    angles: &[f64],
    solution: &BeamformingSolution,
) -> (f64, Vec<f64>) {
    let trial = stack.with_layer(layer, angles).expect("candidate matches the layer width");
    let p = end_to_end_matrix(&trial, &channels.omega)
        .expect("stack and diffraction set are consistent");
    let mut min_ratio_db = f64::INFINITY;
    let mut sinrs = Vec::with_capacity(scenario.users());
    for k in 0..scenario.users() {
        let sinr = metrics::sinr_user(
            k,
            &p,
            channels,
            &solution.beamformers,
            &solution.sensing_covariance_opt,
            scenario.user_noise[k],
        );
        sinrs.push(sinr);
        let ratio = sinr / scenario.sinr_thresholds[k];
        min_ratio_db = min_ratio_db.min(10.0 * ratio.log10());
    }
    (min_ratio_db, sinrs)
}

fn angles_to_lifted(angles: &[f64]) -> CVec {
    let n = angles.len();
    CVec::from_fn(n + 1, |i, _| {
        if i < n {
            // u = conj(v) with v the transmission coefficients.
            Complex64::from_polar(1.0, -angles[i])
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

fn lifted_to_angles(u_tilde: &CVec) -> Vec<f64> {
    let n = u_tilde.len() - 1;
    // Global phase is free in the lifted form; rotate entry n to 1.
    let anchor = u_tilde[n];
    let rot = if anchor.norm() > 1e-12 {
        anchor.conj() / Complex64::new(anchor.norm(), 0.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    (0..n)
        .map(|i| {
            let z = u_tilde[i] * rot;
            let u = if z.norm() > 1e-12 { z } else { Complex64::new(1.0, 0.0) };
            // θ = arg(v) = −arg(u), wrapped into [0, 2π).
            let theta = (-u.arg()).rem_euclid(std::f64::consts::TAU);
            theta
        })
        .collect()
}

/// Gaussian randomization over the relaxation covariance. Candidates are the
/// incumbent profile, the leading eigenvector of `V`, and unit-modulus
/// projections of `draws` samples from `CN(0, V)`; the best exact-margin
/// candidate wins, with the incumbent first so ties never regress.
#[allow(clippy::too_many_arguments)]
pub fn randomize_phases(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    layer: usize,
    solution: &BeamformingSolution,
    sdr: &PhaseSdr,
    sdr_solution: &ConicSolution,
    draws: usize,
    rng: &mut impl Rng,
) -> PhaseStageOutcome {
    assert!(
        sdr_solution.status.is_solved(),
        "randomization requires a solved relaxation"
    );
    let v = linalg::hermitize(sdr_solution.value(sdr.v_var));
    let n = v.nrows() - 1;
    let sqrt_v = linalg::psd_sqrt(&v);

    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(draws + 2);
    candidates.push(stack.layer_angles(layer).to_vec());
    let pairs = linalg::psd_eigen_pairs(&v);
    if let Some((_, lead)) = pairs.first() {
        candidates.push(lifted_to_angles(lead));
    }
    for _ in 0..draws {
        let z = CVec::from_fn(n + 1, |_, _| complex_normal(rng));
        candidates.push(lifted_to_angles(&(&sqrt_v * z)));
    }

    let quad_sum = |angles: &[f64]| -> f64 {
        let u = angles_to_lifted(angles);
        (0..scenario.users())
            .map(|k| (sdr.quadratic_margin(scenario, k, &u) / sdr.row_scales[k]).max(0.0))
            .sum()
    };

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for angles in &candidates {
        let (margin_db, _) = score_candidate(scenario, channels, stack, layer, angles, solution);
        let secondary = quad_sum(angles);
        let better = match &best {
            None => true,
            Some((m, s, _)) => margin_db > *m || (margin_db == *m && secondary > *s),
        };
        if better {
            best = Some((margin_db, secondary, angles.clone()));
        }
    }
    let (min_margin_db, _, angles) = best.expect("at least the incumbent is scored");

    let sdr_objective = -sdr_solution.objective;
    // With all scaled margins nonnegative, the chosen rank-one point is
    // feasible for the relaxation, whose optimum must dominate it.
    let u = angles_to_lifted(&angles);
    let margins: Vec<f64> = (0..scenario.users())
        .map(|k| sdr.quadratic_margin(scenario, k, &u) / sdr.row_scales[k])
        .collect();
    let dominance_ok = if margins.iter().all(|&m| m >= 0.0) {
        margins.iter().sum::<f64>() <= sdr_objective * (1.0 + 1e-6) + 1e-9
    } else {
        true
    };

    let improved = angles.as_slice() != stack.layer_angles(layer);
    PhaseStageOutcome { angles, min_margin_db, sdr_objective, dominance_ok, improved }
}

/// Enumerates the full `2^bits`-level codebook over `atoms` phases and
/// returns the profile maximizing `key`; any partially ordered key works, so
/// composite lexicographic rankings are tuples. Ties keep the first profile
/// in enumeration order, which is lexicographic with atom 0 as the most
/// significant digit.
pub fn codebook_argmax<K: PartialOrd>(
    atoms: usize,
    bits: u32,
    mut key: impl FnMut(&[f64]) -> K,
) -> Result<Vec<f64>, SubproblemError> {
    let levels = 1u128 << bits;
    let configs = levels.checked_pow(atoms as u32).unwrap_or(u128::MAX);
    if configs > 1 << 24 {
        return Err(SubproblemError::SearchTooLarge { configs });
    }
    let step = std::f64::consts::TAU / levels as f64;

    let mut best: Option<(K, Vec<f64>)> = None;
    let mut levels_idx = vec![0u32; atoms];
    loop {
        let angles: Vec<f64> = levels_idx.iter().map(|&l| l as f64 * step).collect();
        let value = key(&angles);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, angles));
        }
        // Odometer with atom 0 most significant: increment from the right.
        let mut pos = atoms;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            levels_idx[pos] += 1;
            if (levels_idx[pos] as u128) < levels {
                break;
            }
            levels_idx[pos] = 0;
        }
        if levels_idx.iter().all(|&l| l == 0) {
            break;
        }
    }
    Ok(best.expect("codebook is never empty").1)
}

/// Exhaustively search the `2^bits`-level codebook for the angles of one
/// layer, ranking exactly like the randomization stage. Ties keep the first
/// configuration in lexicographic order (atom 0 most significant).
pub fn exhaustive_codebook_search(
    scenario: &Scenario,
    channels: &ChannelSet,
    stack: &PhaseStack,
    layer: usize,
    solution: &BeamformingSolution,
    sdr: &PhaseSdr,
    bits: u32,
) -> Result<PhaseStageOutcome, SubproblemError> {
    let quad_sum = |angles: &[f64]| -> f64 {
        let u = angles_to_lifted(angles);
        (0..scenario.users())
            .map(|k| (sdr.quadratic_margin(scenario, k, &u) / sdr.row_scales[k]).max(0.0))
            .sum()
    };

    let angles = codebook_argmax(stack.atoms(), bits, |angles| {
        let (margin_db, _) = score_candidate(scenario, channels, stack, layer, angles, solution);
        (margin_db, quad_sum(angles))
    })?;

    let (min_margin_db, _) = score_candidate(scenario, channels, stack, layer, &angles, solution);
    Ok(PhaseStageOutcome {
        improved: angles.as_slice() != stack.layer_angles(layer),
        angles,
        min_margin_db,
        sdr_objective: f64::NAN,
        dominance_ok: true,
    })
}
