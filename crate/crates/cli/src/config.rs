//! Experiment configuration.
//!
//! A single TOML file describes the deployment, the metasurface, the sweep
//! axes, and the optimizer knobs. Power-like quantities are written in dBm
//! and SINR thresholds in dB; both are converted to linear units exactly once,
//! when a [`Scenario`] is instantiated for a sweep cell.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use sim_isac::channel::Scenario;
use sim_isac::conic::SolverOptions;
use sim_isac::mao::MaoParams;
use sim_isac::propagation::{SimGeometry, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub sim: SimConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub mao: MaoConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bs_position: [f64; 3],
    pub sim_position: [f64; 3],
    pub cu_positions: Vec<[f64; 3]>,
    pub bs_antennas: usize,
    pub power_budget_dbm: f64,
    pub user_noise_dbm: Vec<f64>,
    pub radar_noise_dbm: f64,
    pub symbols_per_block: usize,
    pub rician_factor: f64,
    pub path_loss_exponents: PathLossConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossConfig {
    pub bs_sim: f64,
    pub sim_cu: f64,
    pub bs_cu: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub atoms_per_layer: usize,
    pub carrier_ghz: f64,
    pub thickness_wavelengths: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub gammas_db: Vec<f64>,
    pub layers: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaoConfig {
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub randomization_count: usize,
    pub init_retries: usize,
}

impl Default for MaoConfig {
    fn default() -> Self {
        let defaults = MaoParams::new(0);
        MaoConfig {
            max_sweeps: defaults.max_sweeps,
            rel_tol: defaults.rel_tol,
            randomization_count: defaults.randomization_count,
            init_retries: defaults.init_retries,
        }
    }
}

/// `10^((dbm − 30) / 10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(x)`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ExperimentConfig =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if s.cu_positions.is_empty() {
            bail!("at least one user position is required");
        }
        if s.user_noise_dbm.len() != s.cu_positions.len() {
            bail!(
                "{} user noise entries for {} users",
                s.user_noise_dbm.len(),
                s.cu_positions.len()
            );
        }
        for value in [
            s.power_budget_dbm,
            s.radar_noise_dbm,
            s.rician_factor,
            self.sim.carrier_ghz,
            self.sim.thickness_wavelengths,
        ]
        .iter()
        .chain(&s.user_noise_dbm)
        .chain(self.sweep.gammas_db.iter())
        {
            if !value.is_finite() {
                bail!("non-finite value in config");
            }
        }
        if s.bs_antennas == 0 {
            bail!("base station needs at least one antenna");
        }
        if self.sim.carrier_ghz <= 0.0 || self.sim.thickness_wavelengths <= 0.0 {
            bail!("carrier frequency and stack thickness must be positive");
        }
        if self.sweep.layers.iter().any(|l| *l == 0) {
            bail!("layer counts must be at least 1");
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / (self.sim.carrier_ghz * 1e9)
    }

    /// Concrete scenario for one SINR threshold (same threshold at every
    /// user), with all dB quantities converted to linear units.
    pub fn scenario(&self, gamma_db: f64) -> Result<Scenario> {
        let s = &self.scenario;
        let gamma = db_to_linear(gamma_db);
        Scenario::new(
            s.bs_position.into(),
            s.sim_position.into(),
            s.cu_positions.iter().map(|p| (*p).into()).collect(),
            s.bs_antennas,
            dbm_to_watts(s.power_budget_dbm),
            s.user_noise_dbm.iter().copied().map(dbm_to_watts).collect(),
            dbm_to_watts(s.radar_noise_dbm),
            s.symbols_per_block,
            s.rician_factor,
            (
                s.path_loss_exponents.bs_sim,
                s.path_loss_exponents.sim_cu,
                s.path_loss_exponents.bs_cu,
            ),
            vec![gamma; s.cu_positions.len()],
        )
        .map_err(Into::into)
    }

    pub fn geometry(&self, layers: usize) -> Result<SimGeometry> {
        let wavelength = self.wavelength();
        SimGeometry::new(
            layers,
            self.sim.atoms_per_layer,
            wavelength,
            self.sim.thickness_wavelengths * wavelength,
        )
        .map_err(Into::into)
    }

    pub fn mao_params(&self, seed: u64) -> MaoParams {
        MaoParams {
            max_sweeps: self.mao.max_sweeps,
            rel_tol: self.mao.rel_tol,
            randomization_count: self.mao.randomization_count,
            init_retries: self.mao.init_retries,
            seed,
            certify: false,
            solver: SolverOptions::default(),
        }
    }
}

/// Seed list syntax for the command line: either `a..b` (half-open range) or
/// a comma-separated list.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().context("range start")?;
        let hi: u64 = hi.trim().parse().context("range end")?;
        if hi < lo {
            bail!("empty seed range {text}");
        }
        return Ok((lo..hi).collect());
    }
    text.split(',')
        .map(|part| part.trim().parse::<u64>().map_err(Into::into))
        .collect()
}
