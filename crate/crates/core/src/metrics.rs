//! Estimation and service metrics of a configured link.
//!
//! The sensing side is scored by the Cramer-Rao bound for estimating the
//! extended-target response behind the SIM aperture,
//!
//! ```text
//! CRB = (σ_R²/T) · tr((P G R_ie G^H P^H)^{-1}) · tr((P G G^H P^H)^{-1})
//! ```
//!
//! where `R_ie = Σ_k w_k w_k^H + R_0` is the transmit covariance of the whole
//! downlink block. The bound exists only when `P G` has full row rank and
//! `R_ie` has rank at least `N`; otherwise the target response is not
//! identifiable and the bound is `+inf`. Inverse traces are evaluated through
//! Hermitian eigendecompositions, so near-singular but estimable
//! configurations give large finite values instead of failing.
//!
//! The communication side is the standard per-user downlink SINR with the
//! sensing stream contributing interference.

use thiserror::Error;

use crate::channel::ChannelSet;
use crate::linalg;
use crate::{CMat, CVec};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("covariance is not Hermitian (relative asymmetry {0:.2e})")]
    NotHermitian(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("beamformer count {got} does not match covariance count {want}")]
    CountMismatch { got: usize, want: usize },
    #[error("recovered solution drifts from the SDP covariance (relative error {0:.2e})")]
    CovarianceDrift(f64),
    #[error("total power {power:.6e} exceeds budget {budget:.6e}")]
    PowerExceeded { power: f64, budget: f64 },
    #[error("sensing covariance is not PSD (min eigenvalue {0:.2e})")]
    NotPsd(f64),
}

/// Relative eigenvalue cutoff for the estimability rank checks.
pub const RANK_TOL: f64 = 1e-10;

/// Joint output of the beamforming stage: the SDP covariances and the
/// rank-one beamformers recovered from them.
#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    /// Per-user transmit covariances `W̃_k` from the SDP, each `M × M`.
    pub covariances: Vec<CMat>,
    /// Sensing covariance `R_0` from the SDP.
    pub sensing_covariance: CMat,
    /// Recovered rank-one beamformers `w_k`.
    pub beamformers: Vec<CVec>,
    /// Adjusted sensing covariance `R_0^opt` that absorbs the covariance
    /// remainders so the block covariance `R_ie` is preserved exactly.
    pub sensing_covariance_opt: CMat,
}

impl BeamformingSolution {
    /// Block transmit covariance `R_ie = Σ_k w_k w_k^H + R_0^opt`.
    pub fn block_covariance(&self) -> CMat {
        let m = self.sensing_covariance_opt.nrows();
        let mut r = self.sensing_covariance_opt.clone();
        for w in &self.beamformers {
            for i in 0..m {
                for j in 0..m {
                    r[(i, j)] += w[i] * w[j].conj();
                }
            }
        }
        r
    }

    /// Block covariance as the SDP sees it, `Σ_k W̃_k + R_0`.
    pub fn sdp_block_covariance(&self) -> CMat {
        let mut r = self.sensing_covariance.clone();
        for w in &self.covariances {
            r += w;
        }
        r
    }

    /// Checks the recovery identities: the rank-one extraction must preserve
    /// the block covariance to `1e-9` relative, keep `R_0^opt` PSD, and stay
    /// within the power budget (tiny numerical overshoot tolerated).
    pub fn validate(&self, power_budget: f64) -> Result<(), MetricsError> {
        if self.beamformers.len() != self.covariances.len() {
            return Err(MetricsError::CountMismatch {
                got: self.beamformers.len(),
                want: self.covariances.len(),
            });
        }
        let sdp = self.sdp_block_covariance();
        let drift = linalg::frob(&(self.block_covariance() - &sdp)) / linalg::frob(&sdp).max(f64::MIN_POSITIVE);
        if drift > 1e-9 {
            return Err(MetricsError::CovarianceDrift(drift));
        }
        let scale = linalg::trace_re(&sdp).max(f64::MIN_POSITIVE);
        let min_eig = linalg::min_eig(&self.sensing_covariance_opt);
        if min_eig < -1e-8 * scale {
            return Err(MetricsError::NotPsd(min_eig));
        }
        let power = total_power(&self.beamformers, &self.sensing_covariance_opt);
        if power > power_budget * (1.0 + 1e-8) {
            return Err(MetricsError::PowerExceeded { power, budget: power_budget });
        }
        Ok(())
    }
}

/// Cramer-Rao bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbReport {
    /// The bound itself; `+inf` when not estimable.
    pub crb: f64,
    /// `tr((P G R_ie G^H P^H)^{-1})`, the waveform-dependent factor.
    pub factor_comm: f64,
    /// `tr((P G G^H P^H)^{-1})`, the geometry factor.
    pub factor_geom: f64,
    /// Both rank conditions hold.
    pub estimable: bool,
}

/// Estimability rank conditions: `rank(P G) = N` and `rank(R_ie) ≥ N`,
/// with singular values and eigenvalues cut at [`RANK_TOL`] of the largest.
pub fn feasibility_rank_check(p: &CMat, g: &CMat, r_ie: &CMat) -> (bool, bool) {
    let n = p.nrows();
    let pg = p * g;
    let aperture_ok = linalg::rank_relative(&pg, RANK_TOL) == n;
    let excitation_ok = linalg::psd_rank_relative(r_ie, RANK_TOL) >= n;
    (aperture_ok, excitation_ok)
}

/// CRB for the extended-target response through cascade `P` and uplink
/// geometry `G`, under block covariance `r_ie`, radar noise `σ_R²`, and `T`
/// sensing symbols.
pub fn crb_extended(
    p: &CMat,
    g: &CMat,
    r_ie: &CMat,
    radar_noise: f64,
    symbols: usize,
) -> Result<CrbReport, MetricsError> {
    if radar_noise <= 0.0 {
        return Err(MetricsError::NonPositive("radar noise"));
    }
    if symbols == 0 {
        return Err(MetricsError::NonPositive("block length"));
    }
    if p.nrows() != p.ncols() {
        return Err(MetricsError::Dimension("cascade matrix must be square"));
    }
    if g.nrows() != p.ncols() {
        return Err(MetricsError::Dimension("cascade and uplink dimensions differ"));
    }
    if r_ie.nrows() != g.ncols() || r_ie.ncols() != g.ncols() {
        return Err(MetricsError::Dimension("covariance must be M x M"));
    }
    let asym = linalg::asymmetry(r_ie);
    if asym > 1e-10 {
        return Err(MetricsError::NotHermitian(asym));
    }

    let pg = p * g;
    let comm_gram = &pg * r_ie * pg.adjoint();
    let geom_gram = &pg * pg.adjoint();
    let factor_comm = linalg::trace_inverse(&comm_gram);
    let factor_geom = linalg::trace_inverse(&geom_gram);
    let (aperture_ok, excitation_ok) = feasibility_rank_check(p, g, r_ie);
    let estimable = aperture_ok && excitation_ok;
    let crb = if estimable {
        radar_noise / symbols as f64 * factor_comm * factor_geom
    } else {
        f64::INFINITY
    };
    Ok(CrbReport { crb, factor_comm, factor_geom, estimable })
}

/// Downlink SINR of user `k` under cascade `P`, with the sensing stream and
/// the other users' beams as interference.
pub fn sinr_user(
    user: usize,
    p: &CMat,
    channels: &ChannelSet,
    beamformers: &[CVec],
    sensing_covariance: &CMat,
    noise: f64,
) -> f64 {
    let h = effective_channel(user, p, channels);
    let signal = h.dotc(&beamformers[user]).norm_sqr();
    let mut interference = 0.0;
    for (i, w) in beamformers.iter().enumerate() {
        if i != user {
            interference += h.dotc(w).norm_sqr();
        }
    }
    let sensing = (sensing_covariance * &h).dotc(&h).re.max(0.0);
    signal / (interference + sensing + noise)
}

/// Effective downlink channel `h_k = h_d,k + G^H P^H h_r,k` (so that
/// `h_k^H = h_d,k^H + h_r,k^H P G`).
pub fn effective_channel(user: usize, p: &CMat, channels: &ChannelSet) -> CVec {
    &channels.h_d[user] + channels.g.adjoint() * p.adjoint() * &channels.h_r[user]
}

/// Total transmit power `Σ_k ‖w_k‖² + tr(R_0)`.
pub fn total_power(beamformers: &[CVec], sensing_covariance: &CMat) -> f64 {
    let beams: f64 = beamformers.iter().map(|w| w.norm_squared()).sum();
    beams + linalg::trace_re(sensing_covariance)
}
