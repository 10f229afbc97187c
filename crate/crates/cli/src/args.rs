//! Flag definitions and their merge with the config file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use baybayin_core::detection::PostProcess;
use baybayin_core::imgproc::{PipelineConfig, Stage};
use baybayin_core::runtime::{
    Detector, FixedLatencyDetector, ProcessDetector, ProcessMode, ReplayDetector, SleepDetector,
};
use baybayin_core::script::{ClassInventory, Lexicon};

use crate::config::CliConfig;
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    /// Read `<stem>.json` sidecars from a directory.
    Replay,
    /// Talk to an external detector over the line protocol.
    Process,
    /// Empty detections with a configured reported latency.
    FixedLatency,
    /// Empty detections after sleeping a configured time.
    Sleep,
}

impl BackendKind {
    fn parse(s: &str) -> anyhow::Result<Self> {
        <Self as ValueEnum>::from_str(s, true)
            .map_err(|_| UsageError(format!("unknown backend `{s}`")).into())
    }
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Sidecar directory for the replay backend.
    #[arg(long)]
    pub sidecars: Option<PathBuf>,
    /// Detector command line for the process backend, split on whitespace.
    #[arg(long)]
    pub detector_cmd: Option<String>,
    /// Latency for the fixed-latency and sleep backends.
    #[arg(long)]
    pub latency_ms: Option<f64>,
}

impl BackendArgs {
    pub fn build(&self, cfg: &CliConfig, mode: ProcessMode) -> anyhow::Result<Box<dyn Detector + Send>> {
        let kind = match (self.backend, &cfg.backend.kind) {
            (Some(k), _) => k,
            (None, Some(s)) => BackendKind::parse(s)?,
            (None, None) if self.sidecars.is_some() || cfg.backend.sidecars.is_some() => BackendKind::Replay,
            (None, None) if self.detector_cmd.is_some() || cfg.backend.command.is_some() => BackendKind::Process,
            (None, None) => return Err(UsageError("no detector backend configured (see --backend)".into()).into()),
        };
        let latency = || {
            self.latency_ms
                .or(cfg.backend.latency_ms)
                .ok_or_else(|| UsageError("--latency-ms is required for this backend".into()))
        };
        Ok(match kind {
            BackendKind::Replay => {
                let dir = self
                    .sidecars
                    .clone()
                    .or_else(|| cfg.backend.sidecars.clone())
                    .ok_or_else(|| UsageError("--sidecars is required for the replay backend".into()))?;
                Box::new(ReplayDetector::new(dir).map_err(|e| UsageError(e.to_string()))?)
            }
            BackendKind::Process => {
                let cmd: Vec<String> = match (&self.detector_cmd, &cfg.backend.command) {
                    (Some(s), _) => s.split_whitespace().map(String::from).collect(),
                    (None, Some(v)) => v.clone(),
                    (None, None) => {
                        return Err(UsageError("--detector-cmd is required for the process backend".into()).into())
                    }
                };
                Box::new(ProcessDetector::new(&cmd, mode)?)
            }
            BackendKind::FixedLatency => Box::new(FixedLatencyDetector::new(latency()?)?),
            BackendKind::Sleep => Box::new(SleepDetector::new(latency()?)?),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectionArgs {
    /// Minimum confidence kept (inclusive).
    #[arg(long)]
    pub conf: Option<f64>,
    /// NMS IoU threshold; a box is suppressed above it.
    #[arg(long)]
    pub nms_iou: Option<f64>,
    /// Suppress across classes.
    #[arg(long)]
    pub class_agnostic: bool,
}

impl DetectionArgs {
    pub fn resolve(&self, cfg: &CliConfig) -> anyhow::Result<PostProcess> {
        let mut p = cfg.detection;
        if let Some(c) = self.conf {
            p.conf_threshold = c;
        }
        if let Some(i) = self.nms_iou {
            p.nms_iou = i;
        }
        if self.class_agnostic {
            p.class_aware = false;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Comma-separated stages, e.g. `grayscale,sharpen,denoise,binarize,normalize`.
    #[arg(long, value_delimiter = ',')]
    pub stage_order: Option<Vec<Stage>>,
    #[arg(long)]
    pub tv_weight: Option<f64>,
    #[arg(long)]
    pub tv_iterations: Option<u32>,
    #[arg(long)]
    pub sharpen_strength: Option<f64>,
    /// Letterbox canvas side in pixels.
    #[arg(long)]
    pub target_size: Option<u32>,
}

impl PipelineArgs {
    pub fn resolve(&self, cfg: &CliConfig) -> anyhow::Result<PipelineConfig> {
        let mut p = cfg.pipeline.clone();
        if let Some(s) = &self.stage_order {
            p.stage_order = s.clone();
        }
        if let Some(v) = self.tv_weight {
            p.tv_weight = v;
        }
        if let Some(v) = self.tv_iterations {
            p.tv_iterations = v;
        }
        if let Some(v) = self.sharpen_strength {
            p.sharpen_strength = v;
        }
        if let Some(v) = self.target_size {
            p.target_size = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct InventoryArgs {
    /// `classes.txt` with `<id> <name>` lines (default: standard 59 classes).
    #[arg(long)]
    pub classes: Option<PathBuf>,
}

impl InventoryArgs {
    pub fn resolve(&self, cfg: &CliConfig) -> anyhow::Result<ClassInventory> {
        match self.classes.as_ref().or(cfg.inventory.as_ref()) {
            Some(p) => {
                require_exists(p)?;
                ClassInventory::load(p).map_err(|e| UsageError(e.to_string()).into())
            }
            None => Ok(ClassInventory::standard()),
        }
    }
}

pub fn require_exists(p: &Path) -> anyhow::Result<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(UsageError(format!("{} does not exist", p.display())).into())
    }
}

pub fn load_lexicon(flag: Option<&PathBuf>, cfg: &CliConfig) -> anyhow::Result<Option<Lexicon>> {
    match flag.or(cfg.lexicon.as_ref()) {
        Some(p) => {
            require_exists(p)?;
            Lexicon::load(p)
                .map(Some)
                .map_err(|e| UsageError(e.to_string()).into())
        }
        None => Ok(None),
    }
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Image file or directory (searched recursively).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write every intermediate stage under `<output>/stages/<stem>/`.
    #[arg(long)]
    pub dump_stages: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Dataset root with `images/<split>` and `labels/<split>`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "train")]
    pub split: String,
    /// Augmented copies per image.
    #[arg(long)]
    pub variants: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Symmetric rotation range in degrees.
    #[arg(long)]
    pub rotation: Option<f64>,
    /// Symmetric shear range in degrees.
    #[arg(long)]
    pub shear: Option<f64>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[command(flatten)]
    pub inventory: InventoryArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Dataset root with flat `images/` and `labels/`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Train, val and test fractions (default 2400/100/100 of 2600).
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub fractions: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub inventory: InventoryArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Image files or directories.
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub detection: DetectionArgs,
    #[command(flatten)]
    pub inventory: InventoryArgs,
    /// Word list for resolving d/r, e/i and o/u readings.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Run the preprocessing pipeline and hand the result to the detector.
    #[arg(long)]
    pub preprocess: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Directory for per-image sidecars (and overlays with `--render`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    pub render: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of prediction sidecars.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of label files.
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub inventory: InventoryArgs,
    /// IoU for point metrics and mAP@50.
    #[arg(long)]
    pub iou: Option<f64>,
    /// Confidence cut for point metrics.
    #[arg(long)]
    pub conf: Option<f64>,
    /// Writes `report.json`, `report.txt` and `confusion.csv` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Render the confusion matrix as a PNG grid.
    #[arg(long)]
    pub confusion_png: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Image files or directories.
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub detection: DetectionArgs,
    #[arg(long, default_value_t = 1)]
    pub warmup: u32,
    #[arg(long, default_value_t = 5)]
    pub repeats: u32,
    /// Time the preprocessing pipeline as part of each image.
    #[arg(long)]
    pub preprocess: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub sidecar: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub inventory: InventoryArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Dataset root laid out as `images/{train,val,test}` and `labels/...`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub inventory: InventoryArgs,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub patience: Option<u32>,
    #[arg(long)]
    pub batch: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}
