//! JSON configuration file shared by the CLI subcommands.
//!
//! ```json
//! {
//!   "pipeline": { "preweight": "ra", "mu": 20.0, "reducer": "isomap" },
//!   "sbm": { "n": 100, "layers": 3, "communities": 3,
//!            "p_eq": 0.16, "p_neq": 0.06, "alpha": 10.0 },
//!   "sweep": { "points": 25, "rel_tol": 0.05 }
//! }
//! ```
//!
//! Every section and field is optional; missing values take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{read_text, IoError};
use crate::metrics::log_grid;
use crate::network::MultilayerNetwork;
use crate::pipeline::PipelineConfig;
use crate::preweight;
use crate::sbm::SbmConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit coupling grid; overrides the generated one.
    pub grid: Option<Vec<f64>>,
    /// Generated grid spans `lo_factor..hi_factor` times the mean
    /// (pre-weighted) edge weight.
    pub lo_factor: f64,
    pub hi_factor: f64,
    pub points: usize,
    /// Relative tolerance for locating `mu*` on the plateau.
    pub rel_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: None,
            lo_factor: 1e-2,
            hi_factor: 1e2,
            points: 25,
            rel_tol: 0.05,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(g) = &self.grid {
            if g.len() < 4 {
                return bad(format!(
                    "sweep grid needs at least 4 points, got {}",
                    g.len()
                ));
            }
            if g.iter().any(|&m| !(m.is_finite() && m > 0.0)) || g.windows(2).any(|w| w[0] >= w[1])
            {
                return bad("sweep grid must be positive and strictly increasing".into());
            }
        } else {
            if !(self.lo_factor > 0.0
                && self.hi_factor > self.lo_factor
                && self.hi_factor.is_finite())
            {
                return bad(format!(
                    "sweep factors must satisfy 0 < lo_factor < hi_factor, got {} and {}",
                    self.lo_factor, self.hi_factor
                ));
            }
            if self.points < 4 {
                return bad(format!(
                    "sweep needs at least 4 points, got {}",
                    self.points
                ));
            }
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return bad(format!(
                "rel_tol must be non-negative, got {}",
                self.rel_tol
            ));
        }
        Ok(())
    }

    /// The coupling grid for `network` under `pipeline`'s pre-weighting.
    pub fn grid_for(&self, network: &MultilayerNetwork, pipeline: &PipelineConfig) -> Vec<f64> {
        if let Some(g) = &self.grid {
            return g.clone();
        }
        let weighted = preweight::apply(network, pipeline.preweight, pipeline.ra_degree);
        let mean = weighted.mean_edge_weight();
        let mean = if mean > 0.0 { mean } else { 1.0 };
        log_grid(self.lo_factor * mean, self.hi_factor * mean, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub pipeline: PipelineConfig,
    pub sbm: Option<SbmConfig>,
    pub sweep: SweepConfig,
}

impl AppConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&read_text(path)?, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pipeline
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(s) = &self.sbm {
            s.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        self.sweep.validate()
    }
}
