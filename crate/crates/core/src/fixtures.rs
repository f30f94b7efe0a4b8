//! Standard small instances used by the validation oracles and test suites.
//!
//! Two scales are provided. The desk scale mirrors the default experiment
//! configuration (four antennas, four atoms per layer, two users) and
//! exercises the full geometry-to-channel pipeline. The tiny scale is the
//! oracle regime: two antennas, one user, a single two-atom layer, with
//! channels drawn directly at unit scale so that brute-force searches over
//! phases and covariances stay cheap and the SINR constraint actually binds.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::channel::{ChannelSet, Scenario};
use crate::propagation::{DiffractionSet, SimGeometry};
use crate::rng::{complex_normal_matrix, stream_rng, Stream};
use crate::CVec;

/// Default carrier wavelength, meters (5.8 GHz).
pub const DESK_WAVELENGTH: f64 = 299_792_458.0 / 5.8e9;

/// Two-user desk scenario: base station 1 m above the SIM, users on the
/// ground 10 m and 20 m out, 1 GW budget and −120 dBm noise floors, with the
/// same SINR threshold for every user.
pub fn desk_scenario(gamma_linear: f64) -> Scenario {
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
        vec![gamma_linear, gamma_linear],
    )
    .expect("desk scenario is valid")
}

/// Matching SIM geometry: four atoms per layer, three-wavelength stack.
pub fn desk_geometry(layers: usize) -> SimGeometry {
    SimGeometry::new(layers, 4, DESK_WAVELENGTH, 3.0 * DESK_WAVELENGTH)
        .expect("desk geometry is valid")
}

/// Tiny single-layer oracle instance: `M = 2` antennas, `N = 2` atoms, one
/// user, unit-scale channels, and a budget/noise balance at which the SINR
/// threshold genuinely constrains the optimum: the threshold forces a
/// covariance visibly aligned with the user while leaving headroom for the
/// sensing tradeoff on typical draws.
pub fn tiny_instance(seed: u64, gamma_linear: f64) -> (Scenario, ChannelSet) {
    let scenario = Scenario::new(
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(0.0, 0.0, 0.0),
        vec![Vector3::new(0.0, 5.0, -1.0)],
        2,
        4.0,
        vec![0.5],
        0.1,
        8,
        0.5,
        (2.2, 2.8, 3.5),
        vec![gamma_linear],
    )
    .expect("tiny scenario is valid");

    // Channels at unit scale, drawn from the standard substreams. The
    // geometry pipeline is bypassed on purpose: a two-atom layer has no
    // square grid, and with a single layer no diffraction matrix exists.
    let mut rng = stream_rng(seed, Stream::BsSimChannel);
    let g = complex_normal_matrix(2, 2, &mut rng);
    let mut rng = stream_rng(seed, Stream::SimUserChannel(0));
    let h_r = complex_normal_matrix(2, 1, &mut rng);
    let mut rng = stream_rng(seed, Stream::DirectChannel(0));
    let h_d = complex_normal_matrix(2, 1, &mut rng) * Complex64::new(0.3, 0.0);

    let channels = ChannelSet {
        g,
        h_d: vec![CVec::from_column_slice(h_d.as_slice())],
        h_r: vec![CVec::from_column_slice(h_r.as_slice())],
        omega: DiffractionSet::single_layer(),
    };
    (scenario, channels)
}
