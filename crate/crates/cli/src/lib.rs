//! Experiment harness around the metasurface ISAC optimizer.
//!
//! The library half of the command-line tool: configuration parsing with
//! dB-to-linear conversion at the boundary, Monte-Carlo sweeps over SINR
//! thresholds and layer counts, sensing-waveform synthesis from optimized
//! covariances, and deterministic CSV emission. The binary in `main.rs` is a
//! thin dispatcher over these modules.

pub mod config;
pub mod report;
pub mod sweep;
pub mod waveform;
