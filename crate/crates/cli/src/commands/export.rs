use std::path::PathBuf;

use serde::Serialize;

use baybayin_core::dataset::{compute_class_weights, layout_dirs, DatasetIndex, Split};

use super::{print_json, to_json, write_file};
use crate::args::{require_exists, ExportArgs};
use crate::config::{CliConfig, TrainConfig};

#[derive(Serialize)]
struct SplitLayout {
    images: PathBuf,
    labels: PathBuf,
    count: usize,
}

/// Dataset description read by the trainer.
#[derive(Serialize)]
struct Layout {
    root: PathBuf,
    num_classes: usize,
    names: Vec<String>,
    train: SplitLayout,
    val: Option<SplitLayout>,
    test: Option<SplitLayout>,
}

#[derive(Serialize)]
struct ClassWeights {
    source_split: Split,
    weights: Vec<f64>,
}

pub fn run(args: ExportArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    require_exists(&args.dataset)?;
    let inventory = args.inventory.resolve(cfg)?;
    let mut train = TrainConfig::default();
    if let Some(v) = args.epochs {
        train.max_epochs = v;
    }
    if let Some(v) = args.patience {
        train.patience = v;
    }
    if let Some(v) = args.batch {
        train.batch = v;
    }
    train.seed = args.seed.or(cfg.seed).unwrap_or(0);
    train.validate()?;

    let root = std::fs::canonicalize(&args.dataset)?;
    let load = |s: Split| -> anyhow::Result<Option<(DatasetIndex, SplitLayout)>> {
        let (images, labels) = layout_dirs(&root, Some(s));
        if !images.is_dir() {
            return Ok(None);
        }
        let idx = DatasetIndex::load(&root, Some(s), inventory.len())?;
        let count = idx.len();
        Ok(Some((idx, SplitLayout { images, labels, count })))
    };
    let (train_idx, train_layout) = load(Split::Train)?
        .ok_or_else(|| anyhow::anyhow!("{} has no images/train directory", root.display()))?;
    let val = load(Split::Val)?.map(|v| v.1);
    let test = load(Split::Test)?.map(|v| v.1);

    let weights = compute_class_weights(&train_idx, inventory.len())?;
    let layout = Layout {
        root: root.clone(),
        num_classes: inventory.len(),
        names: inventory.names(),
        train: train_layout,
        val,
        test,
    };

    write_file(&args.output.join("train_config.json"), to_json(&train)?)?;
    write_file(
        &args.output.join(&train.class_weights),
        to_json(&ClassWeights {
            source_split: Split::Train,
            weights,
        })?,
    )?;
    write_file(&args.output.join("dataset.json"), to_json(&layout)?)?;
    write_file(&args.output.join("classes.txt"), inventory.to_classes_file())?;
    print_json(&train)
}
