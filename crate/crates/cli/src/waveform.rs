//! Sensing waveform synthesis.
//!
//! The optimizer returns a sensing covariance `R0`; the transmitter needs a
//! concrete `M × T` symbol block `X0` whose sample covariance `(1/T)·X0·X0^H`
//! equals `R0` exactly. Right-multiplying the PSD square root of `R0` by any
//! matrix with orthogonal rows of norm `√T` achieves this; here the rows come
//! from a chirp-like unit-modulus sequence `E[a, t] = e^{−j·2π·a·t/T}`, which
//! keeps the per-symbol power flat.

use num_complex::Complex64;
use thiserror::Error;

use sim_isac::linalg::psd_sqrt;
use sim_isac::CMat;

#[derive(Debug, Error, PartialEq)]
pub enum WaveformError {
    #[error("block of {symbols} symbols cannot carry {antennas} independent streams")]
    TooFewSymbols { symbols: usize, antennas: usize },
}

/// Synthesizes an `M × T` block with sample covariance exactly `r0`.
/// Requires `T ≥ M` so the rows of the mixing sequence stay orthogonal.
pub fn synthesize_sensing_waveform(r0: &CMat, symbols: usize) -> Result<CMat, WaveformError> {
    let antennas = r0.nrows();
    if symbols < antennas {
        return Err(WaveformError::TooFewSymbols { symbols, antennas });
    }
    let root = psd_sqrt(r0);
    let tau = std::f64::consts::TAU;
    let mixing = CMat::from_fn(antennas, symbols, |a, t| {
        Complex64::from_polar(1.0, -tau * (a * t) as f64 / symbols as f64)
    });
    Ok(root * mixing)
}
