use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Connectivity;
use crate::manifold::{CostMode, CostParams, EmbeddingScale, LleParams, DEFAULT_REG};
use crate::sensing::SensingModel;
use crate::terrain::PeakParams;
use crate::watershed::DEFAULT_LEVELS;

/// Parameter swept by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Beta,
    Alpha,
    /// LLE neighbor count.
    K,
    /// Cost factor.
    A,
    /// Number of deployed sensors.
    Count,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::Alpha => "alpha",
            SweepAxis::K => "k",
            SweepAxis::A => "a",
            SweepAxis::Count => "count",
        }
    }

    /// Grid used when the config does not list values.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepAxis::Beta => vec![0.1, 0.2, 0.3, 0.4, 0.5],
            SweepAxis::Alpha => vec![2.0, 3.0, 4.0],
            SweepAxis::K => (6..=14).map(f64::from).collect(),
            SweepAxis::A => (1..=9).map(f64::from).collect(),
            SweepAxis::Count => (1..=7).map(|c| f64::from(c * 10)).collect(),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "beta" => SweepAxis::Beta,
            "alpha" => SweepAxis::Alpha,
            "k" => SweepAxis::K,
            "a" => SweepAxis::A,
            "count" => SweepAxis::Count,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown sweep axis `{other}` (expected beta|alpha|k|a|count)"
                )))
            }
        })
    }
}

/// Everything that determines a sweep. Serialized as JSON with these
/// field names; omitted fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub length: usize,
    pub width: usize,
    pub peaks: usize,
    pub rho: f64,
    pub eta: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub k: usize,
    pub reg: f64,
    pub embedding_scale: EmbeddingScale,
    pub alpha: f64,
    pub beta: f64,
    pub cost_factor: f64,
    pub cost_mode: CostMode,
    pub epsilon_h: f64,
    /// Sensing radius; `null` disables the cutoff.
    pub d_r: Option<f64>,
    /// Per-point probability threshold for the coverage ratio.
    pub p_t: f64,
    /// Coverage-ratio target.
    pub p_thed: f64,
    /// Sensor count when the sweep axis is not `count`.
    pub nodes: usize,
    pub axis: SweepAxis,
    /// Sweep grid; the axis default when absent.
    pub values: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    pub levels: u32,
    /// 4 or 8.
    pub connectivity: u8,
    /// Regenerate terrain and embedding for every trial.
    pub fresh_terrain: bool,
    /// Skip the parameter-envelope checks.
    pub unsafe_ranges: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let peaks = PeakParams::default();
        let model = SensingModel::default();
        ExperimentConfig {
            length: 50,
            width: 50,
            peaks: peaks.count,
            rho: peaks.rho,
            eta: peaks.eta,
            omega_min: peaks.omega_min,
            omega_max: peaks.omega_max,
            k: 6,
            reg: DEFAULT_REG,
            embedding_scale: EmbeddingScale::NeighborMatched,
            alpha: model.alpha,
            beta: model.beta,
            cost_factor: model.cost.a,
            cost_mode: model.cost.mode,
            epsilon_h: model.cost.epsilon_h,
            d_r: model.d_r,
            p_t: 0.80,
            p_thed: 0.90,
            nodes: 20,
            axis: SweepAxis::Beta,
            values: None,
            trials: 20,
            seed: 2014,
            levels: DEFAULT_LEVELS,
            connectivity: 8,
            fresh_terrain: false,
            unsafe_ranges: false,
        }
    }
}

fn check_within(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidRange(format!(
            "{name} = {v} outside [{lo}, {hi}]"
        )))
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        self.values
            .clone()
            .unwrap_or_else(|| self.axis.default_values())
    }

    /// Copy of the config with the swept parameter set to `value`.
    pub fn at(&self, value: f64) -> ExperimentConfig {
        let mut c = self.clone();
        match self.axis {
            SweepAxis::Beta => c.beta = value,
            SweepAxis::Alpha => c.alpha = value,
            SweepAxis::K => c.k = value.round() as usize,
            SweepAxis::A => c.cost_factor = value,
            SweepAxis::Count => c.nodes = value.round() as usize,
        }
        c
    }

    pub fn peak_params(&self) -> PeakParams {
        PeakParams {
            count: self.peaks,
            rho: self.rho,
            eta: self.eta,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
        }
    }

    pub fn lle_params(&self) -> LleParams {
        LleParams {
            k: self.k,
            reg: self.reg,
            scale: self.embedding_scale,
        }
    }

    pub fn sensing_model(&self) -> SensingModel {
        SensingModel {
            alpha: self.alpha,
            beta: self.beta,
            cost: CostParams {
                a: self.cost_factor,
                mode: self.cost_mode,
                epsilon_h: self.epsilon_h,
            },
            d_r: self.d_r,
        }
    }

    pub fn connectivity(&self) -> Result<Connectivity> {
        Connectivity::from_count(self.connectivity).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "connectivity must be 4 or 8, got {}",
                self.connectivity
            ))
        })
    }

    /// Checks one parameter point (ignores the sweep grid).
    pub fn validate_point(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.length < 2 || self.width < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 2x2, got {}x{}",
                self.length, self.width
            )));
        }
        if self.levels < 2 {
            return Err(Error::InvalidParameter("levels must be >= 2".into()));
        }
        self.connectivity()?;
        self.sensing_model().validate()?;
        check_within("p_t", self.p_t, 0.0, 1.0)?;
        check_within("p_thed", self.p_thed, 0.0, 1.0)?;
        if self.k == 0 || self.k >= self.length * self.width {
            return Err(Error::KTooLarge {
                k: self.k,
                n: self.length * self.width,
            });
        }
        if self.nodes > self.length * self.width {
            return Err(Error::TooManyNodes {
                count: self.nodes,
                n: self.length * self.width,
            });
        }
        if !self.unsafe_ranges {
            check_within("peaks", self.peaks as f64, 1.0, 100.0)?;
            check_within("omega_min", self.omega_min, 1.0, 100.0)?;
            check_within("omega_max", self.omega_max, self.omega_min, 100.0)?;
            check_within("k", self.k as f64, 6.0, 14.0)?;
            check_within("alpha", self.alpha, 2.0, 4.0)?;
            check_within("beta", self.beta, 0.1, 0.5)?;
            check_within("a", self.cost_factor, 1.0, 9.0)?;
        }
        Ok(())
    }

    /// Checks the base config and every sweep point.
    pub fn validate(&self) -> Result<()> {
        self.validate_point()?;
        for v in self.sweep_values() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("sweep value {v}")));
            }
            self.at(v).validate_point()?;
        }
        Ok(())
    }
}
