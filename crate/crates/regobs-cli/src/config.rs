//! JSON run configuration: schema, defaults, and validated loading.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use regobs_core::{DomainSpec, Method, Region, Sensor, Thresholds};

/// Top-level run configuration, one JSON document per run.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Config schema version; this build reads version 1.
    pub schema: u32,
    pub domain: DomainSpec,
    /// Region of interest; omitted means the whole domain.
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub sensors: Vec<Sensor>,
    #[serde(default)]
    pub time: TimeConfig,
    /// Verdict route; omitted picks rank for whole-domain questions and
    /// gramian for regional ones.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Recorded in reports for provenance of seeded studies.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Worker threads for the sweep; `REGOBS_THREADS` overrides.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub initial_state: Option<StateSpec>,
    #[serde(default)]
    pub reconstruct: Option<ReconstructConfig>,
    #[serde(default)]
    pub counterexample: Option<StudyConfig>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    /// Number of retained modes on the whole domain.
    pub n: usize,
    /// Number of retained modes on the region. Omitted: the rank route
    /// reuses `n`; the gramian/reconstruction routes keep region modes
    /// decaying at most a quarter as fast as the global cutoff.
    pub n_region: Option<usize>,
    pub convention: regobs_core::Convention,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig {
            n: 25,
            n_region: None,
            convention: regobs_core::Convention::Laplacian,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub horizon: f64,
    pub samples: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            horizon: 1.0,
            samples: 64,
        }
    }
}

/// Placement grid: the cartesian product of the axis ranges, applied to one
/// sensor of the suite.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Index of the swept sensor within `sensors`.
    #[serde(default)]
    pub sensor: usize,
    pub axes: Vec<AxisSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    /// Coordinate index the axis moves (0 = ξ₁, 1 = ξ₂).
    pub coord: usize,
    pub start: f64,
    pub stop: f64,
    /// Number of grid points along this axis, endpoints included.
    pub steps: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + h * i as f64).collect()
    }
}

/// An initial state, either a single basis mode (1-based position in the
/// eigenvalue-ordered basis) or a full coefficient list.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
pub enum StateSpec {
    Mode { mode: usize },
    Coefficients { coefficients: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    /// Trajectory CSV path, header `t,y_1,…,y_q`.
    pub trajectory: PathBuf,
    /// Tikhonov weight; 0 solves plain least squares.
    #[serde(default)]
    pub ridge: f64,
    /// Known initial state, for error reporting.
    #[serde(default)]
    pub ground_truth: Option<StateSpec>,
}

/// Parameters of the 1D pointwise study.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub alpha: f64,
    pub b: f64,
    pub n: usize,
    pub horizon: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            alpha: 0.25,
            b: 0.5,
            n: 20,
            horizon: 1.0,
        }
    }
}

/// Loads and structurally validates a config file. Schema violations are
/// reported with the JSON path to the offending field.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| anyhow::anyhow!("config field `{}`: {}", e.path(), e.inner()))?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &RunConfig) -> Result<()> {
    if config.schema != 1 {
        bail!("unsupported config schema version {}", config.schema);
    }
    config.domain.validate()?;
    if let Some(region) = &config.region {
        region.validate_in(&config.domain)?;
    }
    if config.basis.n == 0 {
        bail!("config field `basis.n`: at least one mode is required");
    }
    if config.basis.n_region == Some(0) {
        bail!("config field `basis.n_region`: at least one mode is required");
    }
    if !(config.time.horizon.is_finite() && config.time.horizon > 0.0) {
        bail!("config field `time.horizon`: must be positive");
    }
    if config.time.samples < 2 {
        bail!("config field `time.samples`: at least two samples are required");
    }
    let t = &config.thresholds;
    if !(t.eps_group > 0.0 && t.tau_rank > 0.0 && t.tau_gram_rel > 0.0 && t.tau_rat > 0.0) {
        bail!("config field `thresholds`: all tolerances must be positive");
    }
    if let Some(sweep) = &config.sweep {
        if sweep.axes.is_empty() {
            bail!("config field `sweep.axes`: the grid is empty");
        }
        if sweep.sensor >= config.sensors.len() {
            bail!(
                "config field `sweep.sensor`: index {} with only {} sensors",
                sweep.sensor,
                config.sensors.len()
            );
        }
        for (i, axis) in sweep.axes.iter().enumerate() {
            if axis.steps == 0 {
                bail!("config field `sweep.axes[{i}].steps`: at least one point");
            }
            if axis.coord >= config.domain.dim() {
                bail!(
                    "config field `sweep.axes[{i}].coord`: axis {} in a {}-dimensional domain",
                    axis.coord,
                    config.domain.dim()
                );
            }
        }
    }
    if let Some(r) = &config.reconstruct {
        if !(r.ridge.is_finite() && r.ridge >= 0.0) {
            bail!("config field `reconstruct.ridge`: must be finite and nonnegative");
        }
    }
    Ok(())
}
