use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::PrepareConfig;
use crate::dsp::FrontendConfig;
use crate::error::{Error, Result};
use crate::head::{HeadConfig, TrainConfig};

/// Every tunable of the pipeline. Defaults carry the reference settings:
/// 16 kHz, 1 s segments, 25 ms / 10 ms frames, 50 bands, 80/20 split,
/// Adam with batch 128 and learning rate 3e-4 for 15 epochs.
///
/// The top-level `seed` drives every random stage; the per-stage seed
/// fields are overwritten with it on resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub frontend: FrontendConfig,
    pub prepare: PrepareConfig,
    pub train: TrainConfig,
    pub hidden_dims: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            frontend: FrontendConfig::default(),
            prepare: PrepareConfig::default(),
            train: TrainConfig::default(),
            hidden_dims: vec![512],
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid with a TOML file when given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start as u64);
            Error::format(offset, format!("{}: {}", path.display(), e.message()))
        })
    }

    /// Propagate the global seed into every stage.
    pub fn resolve(mut self) -> Self {
        self.prepare.seed = self.seed;
        self.train.seed = self.seed;
        self
    }

    pub fn head_config(&self, input_dim: usize) -> HeadConfig {
        HeadConfig {
            input_dim,
            hidden_dims: self.hidden_dims.clone(),
            n_classes: crate::LabelSet::N_CLASSES,
            seed: self.seed,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("# unserializable config: {e}"))
    }
}
