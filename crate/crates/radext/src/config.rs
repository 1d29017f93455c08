//! Optional TOML configuration. Command-line flags override it, and it
//! overrides the built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use radext_core::TrainConfig;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dictionary: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub constrain_bio: Option<bool>,
    #[serde(default)]
    pub train: TrainOverrides,
}

/// Partial training settings; unset fields fall through to the next layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub initial_rate: Option<f64>,
    pub decayed_rate: Option<f64>,
    pub decay_epoch: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub l2: Option<f64>,
}

impl TrainOverrides {
    /// Fields set here win over `base`.
    pub fn over(self, base: TrainOverrides) -> TrainOverrides {
        TrainOverrides {
            epochs: self.epochs.or(base.epochs),
            initial_rate: self.initial_rate.or(base.initial_rate),
            decayed_rate: self.decayed_rate.or(base.decayed_rate),
            decay_epoch: self.decay_epoch.or(base.decay_epoch),
            batch_size: self.batch_size.or(base.batch_size),
            seed: self.seed.or(base.seed),
            l2: self.l2.or(base.l2),
        }
    }

    pub fn resolve(self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            initial_rate: self.initial_rate.unwrap_or(d.initial_rate),
            decayed_rate: self.decayed_rate.unwrap_or(d.decayed_rate),
            decay_epoch: self.decay_epoch.unwrap_or(d.decay_epoch),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            seed: self.seed.unwrap_or(d.seed),
            l2: self.l2.unwrap_or(d.l2),
        }
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| Error::format(path, 0, e.to_string()))
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
