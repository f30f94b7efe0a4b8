//! Simulator and optimizer for stacked-metasurface-aided integrated sensing
//! and communications (ISAC).
//!
//! A base station with `M` antennas serves `K` single-antenna users through a
//! stacked intelligent metasurface (SIM): `L` transmissive layers of `N`
//! meta-atoms each, coupled by Rayleigh-Sommerfeld diffraction. The same
//! downlink block doubles as a sensing waveform, and the quantity of interest
//! is the Cramer-Rao bound (CRB) on estimating the extended-target response
//! seen through the metasurface aperture.
//!
//! The crate is organized bottom-up:
//!
//! * [`propagation`]: SIM geometry, phase profiles, inter-layer diffraction,
//!   and the end-to-end cascade matrix.
//! * [`channel`]: deployment scenarios and seeded Rician channel synthesis.
//! * [`metrics`]: CRB, per-user SINR, transmit power, and estimability checks.
//! * [`conic`]: Hermitian semidefinite programming via real embedding and a
//!   dense homogeneous interior-point solver.
//! * [`subproblems`]: the two convexified subproblems of the alternating
//!   optimizer (beamforming SDP, per-layer phase SDR with randomization) plus
//!   an exhaustive codebook search for quantized profiles.
//! * [`mao`]: the safeguarded multi-layer alternating optimization loop.
//! * [`oracle`]: independent validation oracles (brute-force searches, KKT
//!   residual checks, naive diffraction re-evaluation).
//!
//! [`fixtures`] holds the small standard instances shared by the test suites
//! and the oracles.

pub mod channel;
pub mod conic;
pub mod fixtures;
pub mod linalg;
pub mod mao;
pub mod metrics;
pub mod oracle;
pub mod propagation;
pub mod rng;
pub mod subproblems;

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<Complex64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type RVec = nalgebra::DVector<f64>;
