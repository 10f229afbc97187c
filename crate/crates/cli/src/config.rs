//! TOML configuration file. Command-line flags override anything set here,
//! and anything unset falls back to the library defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use baybayin_core::dataset::AugmentSpec;
use baybayin_core::detection::PostProcess;
use baybayin_core::eval::EvalConfig;
use baybayin_core::imgproc::PipelineConfig;

use crate::UsageError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    /// `classes.txt`; the standard 59-class inventory when unset.
    pub inventory: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub detection: PostProcess,
    pub backend: BackendConfig,
    pub eval: EvalConfig,
    pub augment: AugmentSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: Option<String>,
    /// Sidecar directory for replay.
    pub sidecars: Option<PathBuf>,
    /// Program and arguments for the external process.
    pub command: Option<Vec<String>>,
    pub latency_ms: Option<f64>,
}

impl CliConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.pipeline.validate()?;
        self.detection.validate()?;
        self.eval.validate()?;
        self.augment.validate()?;
        for p in [&self.inventory, &self.lexicon].into_iter().flatten() {
            if !p.exists() {
                return Err(UsageError(format!("{} does not exist", p.display())).into());
            }
        }
        Ok(())
    }
}

/// Hyperparameters handed to the external trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub image_size: u32,
    pub batch: u32,
    pub optimizer: String,
    pub lr0: f64,
    pub momentum: f64,
    pub max_epochs: u32,
    pub patience: u32,
    pub loss: String,
    pub class_weights: PathBuf,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            image_size: 640,
            batch: 32,
            optimizer: "SGD".into(),
            lr0: 0.01,
            momentum: 0.937,
            max_epochs: 600,
            patience: 100,
            loss: "bce_with_logits".into(),
            class_weights: PathBuf::from("class_weights.json"),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = self.image_size > 0
            && self.batch > 0
            && self.lr0 > 0.0
            && self.momentum > 0.0
            && self.max_epochs > 0
            && self.patience > 0;
        if !positive {
            return Err(UsageError("training hyperparameters must all be positive".into()).into());
        }
        if self.patience > self.max_epochs {
            return Err(UsageError(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            ))
            .into());
        }
        Ok(())
    }
}
