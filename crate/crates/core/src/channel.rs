//! Deployment scenarios and seeded channel synthesis.
//!
//! A scenario places one multi-antenna base station, one SIM, and `K`
//! single-antenna users in 3-D space. Channels follow a distance power law
//! referenced to 1 m (`L(d) = 1e-3 · d^{-α}`) with Rician small-scale fading:
//! the line-of-sight component is a far-field steering outer product built
//! from the physical array layouts, and the diffuse component is iid CN(0, 1).
//!
//! Conventions, fixed here once for the whole crate:
//!
//! * the base station is a half-wavelength uniform linear array along the
//!   global x axis, centered on its position;
//! * the SIM stack axis points from the base station through the SIM center,
//!   layer 0 facing the base station and later layers receding from it; atom
//!   grids live in the plane orthogonal to that axis;
//! * the base-station-facing layer provides the receive phases of the
//!   BS-to-SIM channel, the last layer the transmit phases of the
//!   SIM-to-user channels;
//! * the direct BS-to-user line-of-sight component is the all-ones vector
//!   (the obstructed direct path carries no resolvable geometry);
//! * fading is drawn from one substream per link per user (see
//!   [`crate::rng`]), so a seed pins every channel bit for bit.

use nalgebra::Vector3;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::propagation::{build_diffraction_set, DiffractionSet, PropagationError, SimGeometry};
use crate::rng::{complex_normal_matrix, stream_rng, Stream};
use crate::{CMat, CVec};

/// Reference path gain at 1 m (−30 dB).
pub const REFERENCE_PATH_GAIN: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("path-loss distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("scenario needs at least one user")]
    NoUsers,
    #[error("{users} users exceed {antennas} base-station antennas")]
    TooManyUsers { users: usize, antennas: usize },
    #[error("per-user field has {got} entries for {want} users")]
    UserCountMismatch { got: usize, want: usize },
    #[error("{0} positions coincide")]
    CoincidentNodes(&'static str),
    #[error("Rician factor must be nonnegative, got {0}")]
    NegativeRician(f64),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error("base-station-to-SIM channel is rank deficient")]
    RankDeficient,
}

/// Node placement, radio parameters, and service constraints for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bs_position: Vector3<f64>,
    pub sim_position: Vector3<f64>,
    pub cu_positions: Vec<Vector3<f64>>,
    /// Base-station antennas `M`.
    pub bs_antennas: usize,
    /// Total transmit power budget `P0`, watts.
    pub total_power: f64,
    /// Per-user receiver noise powers `σ_k²`, watts.
    pub user_noise: Vec<f64>,
    /// Radar receiver noise power `σ_R²`, watts.
    pub radar_noise: f64,
    /// Sensing block length `T`, symbols.
    pub symbols_per_block: usize,
    /// Rician factor κ shared by all fading links.
    pub rician_factor: f64,
    /// Path-loss exponent of the BS-to-SIM link.
    pub alpha_bs_sim: f64,
    /// Path-loss exponent of the SIM-to-user links.
    pub alpha_sim_cu: f64,
    /// Path-loss exponent of the direct BS-to-user links.
    pub alpha_bs_cu: f64,
    /// Per-user SINR thresholds `Γ_k`, linear.
    pub sinr_thresholds: Vec<f64>,
}

impl Scenario {
    /// Validates mutual consistency; see the field docs for the constraints.
    pub fn new(
        bs_position: Vector3<f64>,
        sim_position: Vector3<f64>,
        cu_positions: Vec<Vector3<f64>>,
        bs_antennas: usize,
        total_power: f64,
        user_noise: Vec<f64>,
        radar_noise: f64,
        symbols_per_block: usize,
        rician_factor: f64,
        alphas: (f64, f64, f64),
        sinr_thresholds: Vec<f64>,
    ) -> Result<Self, ChannelError> {
        let users = cu_positions.len();
        if users == 0 {
            return Err(ChannelError::NoUsers);
        }
        if bs_antennas == 0 {
            return Err(ChannelError::NonPositive("antenna count"));
        }
        if users > bs_antennas {
            return Err(ChannelError::TooManyUsers { users, antennas: bs_antennas });
        }
        if user_noise.len() != users {
            return Err(ChannelError::UserCountMismatch { got: user_noise.len(), want: users });
        }
        if sinr_thresholds.len() != users {
            return Err(ChannelError::UserCountMismatch { got: sinr_thresholds.len(), want: users });
        }
        if total_power <= 0.0 {
            return Err(ChannelError::NonPositive("total power"));
        }
        if radar_noise <= 0.0 {
            return Err(ChannelError::NonPositive("radar noise"));
        }
        if user_noise.iter().any(|&v| v <= 0.0) {
            return Err(ChannelError::NonPositive("user noise"));
        }
        if sinr_thresholds.iter().any(|&v| v <= 0.0) {
            return Err(ChannelError::NonPositive("SINR threshold"));
        }
        if symbols_per_block == 0 {
            return Err(ChannelError::NonPositive("block length"));
        }
        if rician_factor < 0.0 {
            return Err(ChannelError::NegativeRician(rician_factor));
        }
        if (bs_position - sim_position).norm() == 0.0 {
            return Err(ChannelError::CoincidentNodes("base station and SIM"));
        }
        for cu in &cu_positions {
            if (cu - sim_position).norm() == 0.0 {
                return Err(ChannelError::CoincidentNodes("SIM and user"));
            }
            if (cu - bs_position).norm() == 0.0 {
                return Err(ChannelError::CoincidentNodes("base station and user"));
            }
        }
        Ok(Self {
            bs_position,
            sim_position,
            cu_positions,
            bs_antennas,
            total_power,
            user_noise,
            radar_noise,
            symbols_per_block,
            rician_factor,
            alpha_bs_sim: alphas.0,
            alpha_sim_cu: alphas.1,
            alpha_bs_cu: alphas.2,
            sinr_thresholds,
        })
    }

    /// Number of served users `K`.
    pub fn users(&self) -> usize {
        self.cu_positions.len()
    }
}

/// One realization of every channel in a scenario, plus the diffraction
/// matrices of the SIM the realization was drawn for.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// BS-to-SIM channel `G`, `N × M`.
    pub g: CMat,
    /// Direct BS-to-user channels `h_d,k`, each of length `M`.
    pub h_d: Vec<CVec>,
    /// SIM-to-user channels `h_r,k`, each of length `N`.
    pub h_r: Vec<CVec>,
    /// Inter-layer diffraction matrices of the SIM.
    pub omega: DiffractionSet,
}

/// Distance power law `1e-3 · d^{-α}`, referenced to 1 m.
pub fn path_loss(distance: f64, exponent: f64) -> Result<f64, ChannelError> {
    if distance <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(distance));
    }
    Ok(REFERENCE_PATH_GAIN * distance.powf(-exponent))
}

/// Rician mixture `√(κ/(1+κ)) · LoS + √(1/(1+κ)) · NLoS` with iid CN(0, 1)
/// diffuse entries, drawn row-major from `rng`. The line-of-sight input sets
/// the output dimensions and must have unit-modulus entries for the mixture
/// to keep unit average entry power.
pub fn rician_matrix(
    kappa: f64,
    los: &CMat,
    rng: &mut impl rand::Rng,
) -> Result<CMat, ChannelError> {
    if kappa < 0.0 {
        return Err(ChannelError::NegativeRician(kappa));
    }
    let los_gain = (kappa / (1.0 + kappa)).sqrt();
    let nlos_gain = (1.0 / (1.0 + kappa)).sqrt();
    let nlos = complex_normal_matrix(los.nrows(), los.ncols(), rng);
    Ok(los * Complex64::new(los_gain, 0.0) + nlos * Complex64::new(nlos_gain, 0.0))
}

/// Orthonormal frame `(u, v)` of the plane orthogonal to `axis`, chosen
/// deterministically: `u` is the projection of the global x axis unless the
/// axis is x itself, in which case the global y axis is used.
fn layer_plane_frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let x = Vector3::new(1.0, 0.0, 0.0);
    let y = Vector3::new(0.0, 1.0, 0.0);
    let mut u = x - axis * axis.dot(&x);
    if u.norm() < 1e-9 {
        u = y - axis * axis.dot(&y);
    }
    let u = u.normalize();
    let v = axis.cross(&u);
    (u, v)
}

/// 3-D positions of the atoms of one layer (0-based, receding from the BS).
fn layer_atom_positions(
    scenario: &Scenario,
    geom: &SimGeometry,
    layer: usize,
) -> Result<Vec<Vector3<f64>>, PropagationError> {
    let axis = (scenario.sim_position - scenario.bs_position).normalize();
    let (u, v) = layer_plane_frame(&axis);
    let depth = if layer == 0 { 0.0 } else { geom.layer_spacing()? * layer as f64 };
    let center = scenario.sim_position + axis * depth;
    (0..geom.atoms_per_layer)
        .map(|n| {
            let (du, dv) = geom.atom_offset(n)?;
            Ok(center + u * du + v * dv)
        })
        .collect()
}

/// Far-field steering phases of an array toward `target`: entry `i` is
/// `e^{jk⟨p_i − c, d̂⟩}` with `c` the array center and `d̂` the unit direction
/// from the center to the target.
fn steering(positions: &[Vector3<f64>], center: &Vector3<f64>, target: &Vector3<f64>, wavelength: f64) -> CVec {
    let dir = (target - center).normalize();
    let k = std::f64::consts::TAU / wavelength;
    CVec::from_iterator(
        positions.len(),
        positions.iter().map(|p| Complex64::from_polar(1.0, k * (p - center).dot(&dir))),
    )
}

fn bs_array_positions(scenario: &Scenario, wavelength: f64) -> Vec<Vector3<f64>> {
    let m = scenario.bs_antennas;
    let half = (m - 1) as f64 / 2.0;
    (0..m)
        .map(|i| scenario.bs_position + Vector3::new((i as f64 - half) * wavelength / 2.0, 0.0, 0.0))
        .collect()
}

/// Draws every channel of the scenario for one seed. The same `(scenario,
/// geom, seed)` triple reproduces the same `ChannelSet` bit for bit.
pub fn build_channels(
    scenario: &Scenario,
    geom: &SimGeometry,
    seed: u64,
) -> Result<ChannelSet, ChannelError> {
    let omega = build_diffraction_set(geom)?;
    let lambda = geom.wavelength;
    let kappa = scenario.rician_factor;

    let bs_positions = bs_array_positions(scenario, lambda);
    let front_atoms = layer_atom_positions(scenario, geom, 0)?;
    let back_atoms = layer_atom_positions(scenario, geom, geom.layers - 1)?;
    let back_center = if geom.layers == 1 {
        scenario.sim_position
    } else {
        let axis = (scenario.sim_position - scenario.bs_position).normalize();
        scenario.sim_position + axis * geom.layer_spacing()? * (geom.layers - 1) as f64
    };

    // BS -> SIM: rank-one steering outer product as line of sight.
    let a_rx = steering(&front_atoms, &scenario.sim_position, &scenario.bs_position, lambda);
    let a_tx = steering(&bs_positions, &scenario.bs_position, &scenario.sim_position, lambda);
    let g_los = CMat::from_fn(geom.atoms_per_layer, scenario.bs_antennas, |n, m| {
        a_rx[n] * a_tx[m].conj()
    });
    let d_bs_sim = (scenario.bs_position - scenario.sim_position).norm();
    let g_gain = path_loss(d_bs_sim, scenario.alpha_bs_sim)?.sqrt();
    let mut rng = stream_rng(seed, Stream::BsSimChannel);
    let g = rician_matrix(kappa, &g_los, &mut rng)? * Complex64::new(g_gain, 0.0);

    let mut h_d = Vec::with_capacity(scenario.users());
    let mut h_r = Vec::with_capacity(scenario.users());
    for (k, cu) in scenario.cu_positions.iter().enumerate() {
        // SIM -> user: steering of the user-facing layer.
        let a_cu = steering(&back_atoms, &back_center, cu, lambda);
        let r_los = CMat::from_fn(geom.atoms_per_layer, 1, |n, _| a_cu[n]);
        let d_sim_cu = (cu - scenario.sim_position).norm();
        let r_gain = path_loss(d_sim_cu, scenario.alpha_sim_cu)?.sqrt();
        let mut rng = stream_rng(seed, Stream::SimUserChannel(k));
        let hr = rician_matrix(kappa, &r_los, &mut rng)? * Complex64::new(r_gain, 0.0);
        h_r.push(CVec::from_column_slice(hr.as_slice()));

        // BS -> user: featureless all-ones line of sight.
        let d_los = CMat::from_element(scenario.bs_antennas, 1, Complex64::new(1.0, 0.0));
        let d_bs_cu = (cu - scenario.bs_position).norm();
        let d_gain = path_loss(d_bs_cu, scenario.alpha_bs_cu)?.sqrt();
        let mut rng = stream_rng(seed, Stream::DirectChannel(k));
        let hd = rician_matrix(kappa, &d_los, &mut rng)? * Complex64::new(d_gain, 0.0);
        h_d.push(CVec::from_column_slice(hd.as_slice()));
    }

    if scenario.bs_antennas >= geom.atoms_per_layer
        && linalg::rank_relative(&g, 1e-10) < geom.atoms_per_layer
    {
        return Err(ChannelError::RankDeficient);
    }

    Ok(ChannelSet { g, h_d, h_r, omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub fn small_scenario() -> Scenario {
        Scenario::new(
            Vector3::new(0.0, 0.0, 11.0),
            Vector3::new(0.0, 0.0, 10.0),
            vec![Vector3::new(0.0, 10.0, 0.0), Vector3::new(0.0, 20.0, 0.0)],
            4,
            1e9,
            vec![1e-15, 1e-15],
            1e-15,
            64,
            0.5,
            (2.2, 2.8, 3.5),
            vec![10.0, 10.0],
        )
        .unwrap()
    }

    fn small_geom() -> SimGeometry {
        SimGeometry::new(2, 4, 0.0517, 3.0 * 0.0517).unwrap()
    }

    #[test]
    fn path_loss_reference_points() {
        assert_relative_eq!(path_loss(10.0, 2.0).unwrap(), 1e-5, max_relative = 1e-12);
        assert_relative_eq!(path_loss(1.0, 3.5).unwrap(), 1e-3, max_relative = 1e-12);
        assert!(path_loss(0.0, 2.0).is_err());
        assert!(path_loss(-1.0, 2.0).is_err());
    }

    #[test]
    fn scenario_rejects_inconsistencies() {
        let base = small_scenario();
        let r = Scenario::new(
            base.bs_position,
            base.sim_position,
            vec![Vector3::new(0.0, 10.0, 0.0); 5],
            4,
            1e9,
            vec![1e-15; 5],
            1e-15,
            64,
            0.5,
            (2.2, 2.8, 3.5),
            vec![10.0; 5],
        );
        assert!(matches!(r, Err(ChannelError::TooManyUsers { .. })));
        let r = Scenario::new(
            base.bs_position,
            base.bs_position,
            base.cu_positions.clone(),
            4,
            1e9,
            vec![1e-15, 1e-15],
            1e-15,
            64,
            0.5,
            (2.2, 2.8, 3.5),
            vec![10.0, 10.0],
        );
        assert!(matches!(r, Err(ChannelError::CoincidentNodes(_))));
    }

    #[test]
    fn rician_mixture_is_exact_combination() {
        let los = CMat::from_element(3, 2, Complex64::new(1.0, 0.0));
        let mut rng = stream_rng(9, Stream::BsSimChannel);
        let out = rician_matrix(0.5, &los, &mut rng).unwrap();
        let mut rng = stream_rng(9, Stream::BsSimChannel);
        let nlos = complex_normal_matrix(3, 2, &mut rng);
        let expect = &los * Complex64::new((1.0f64 / 3.0).sqrt(), 0.0)
            + nlos * Complex64::new((2.0f64 / 3.0).sqrt(), 0.0);
        assert!(linalg::frob(&(out - expect)) < 1e-15);
    }

    #[test]
    fn rician_extremes() {
        let los = CMat::from_fn(2, 2, |i, j| Complex64::from_polar(1.0, (i + 2 * j) as f64));
        let mut rng = stream_rng(1, Stream::BsSimChannel);
        let pure_los = rician_matrix(1e12, &los, &mut rng).unwrap();
        assert!(linalg::frob(&(&pure_los - &los)) < 1e-5);

        let mut rng = stream_rng(1, Stream::BsSimChannel);
        let pure_nlos = rician_matrix(0.0, &los, &mut rng).unwrap();
        let mut rng = stream_rng(1, Stream::BsSimChannel);
        let nlos = complex_normal_matrix(2, 2, &mut rng);
        assert!(linalg::frob(&(pure_nlos - nlos)) < 1e-15);
    }

    #[test]
    fn diffuse_power_split_matches_rician_factor() {
        let n = 100_000;
        let los = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let kappa = 0.5;
        let mut rng = stream_rng(4, Stream::BsSimChannel);
        let mut diffuse_power = 0.0;
        for _ in 0..n {
            let sample = rician_matrix(kappa, &los, &mut rng).unwrap()[(0, 0)];
            let los_part = Complex64::new((kappa / (1.0 + kappa)).sqrt(), 0.0);
            diffuse_power += (sample - los_part).norm_sqr();
        }
        let mean = diffuse_power / n as f64;
        // Diffuse fraction is 1/(1+κ) = 2/3.
        assert!((mean - 2.0 / 3.0).abs() < 0.02 * (2.0 / 3.0), "mean {mean}");
    }

    #[test]
    fn channels_are_seed_deterministic() {
        let scenario = small_scenario();
        let geom = small_geom();
        let a = build_channels(&scenario, &geom, 12).unwrap();
        let b = build_channels(&scenario, &geom, 12).unwrap();
        assert_eq!(a.g, b.g);
        for k in 0..scenario.users() {
            assert_eq!(a.h_d[k], b.h_d[k]);
            assert_eq!(a.h_r[k], b.h_r[k]);
        }
        let c = build_channels(&scenario, &geom, 13).unwrap();
        assert_ne!(a.g, c.g);
    }

    #[test]
    fn bs_sim_link_uses_unit_reference_distance() {
        // Default placement has the SIM exactly 1 m from the BS, so the LoS
        // entry magnitude at κ → ∞ is √(1e-3) regardless of exponent.
        let mut scenario = small_scenario();
        scenario.rician_factor = 1e12;
        let geom = small_geom();
        let set = build_channels(&scenario, &geom, 0).unwrap();
        for z in set.g.iter() {
            assert_relative_eq!(z.norm(), REFERENCE_PATH_GAIN.sqrt(), max_relative = 1e-5);
        }
    }

    #[test]
    fn bs_sim_channel_is_full_rank() {
        let scenario = small_scenario();
        let geom = small_geom();
        let set = build_channels(&scenario, &geom, 5).unwrap();
        assert_eq!(linalg::rank_relative(&set.g, 1e-10), geom.atoms_per_layer);
        assert_eq!(set.g.nrows(), 4);
        assert_eq!(set.g.ncols(), 4);
        assert_eq!(set.h_d[0].len(), 4);
        assert_eq!(set.h_r[0].len(), 4);
        assert_eq!(set.omega.count(), 1);
    }
}
