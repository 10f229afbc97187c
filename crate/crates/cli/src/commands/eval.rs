use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use baybayin_core::dataset::{file_stem, parse_label_file};
use baybayin_core::eval::{evaluate, ConfusionMatrix, EvalImage, EvalReport};
use baybayin_core::runtime::load_sidecar;

use super::{print_json, to_json, write_file};
use crate::args::{require_exists, EvalArgs, OutputFormat};
use crate::config::CliConfig;
use crate::render::confusion_image;

#[derive(Serialize)]
struct EvalOutput<'a> {
    report: &'a EvalReport,
    /// Label files with no prediction sidecar.
    missing_predictions: Vec<String>,
    /// Prediction sidecars with no label file.
    missing_ground_truth: Vec<String>,
}

fn files_by_stem(dir: &Path, ext: &str) -> anyhow::Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let p = entry?.path();
        if p.is_file() && p.extension().and_then(|e| e.to_str()) == Some(ext) {
            out.insert(file_stem(&p), p);
        }
    }
    Ok(out)
}

pub fn run(args: EvalArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    require_exists(&args.pred)?;
    require_exists(&args.gt)?;
    let inventory = args.inventory.resolve(cfg)?;
    let mut eval_cfg = cfg.eval;
    if let Some(v) = args.iou {
        eval_cfg.iou_threshold = v;
    }
    if let Some(v) = args.conf {
        eval_cfg.conf_threshold = v;
    }
    eval_cfg.validate()?;

    let preds = files_by_stem(&args.pred, "json")?;
    let gts = files_by_stem(&args.gt, "txt")?;
    let missing_predictions: Vec<String> = gts.keys().filter(|s| !preds.contains_key(*s)).cloned().collect();
    let missing_ground_truth: Vec<String> = preds.keys().filter(|s| !gts.contains_key(*s)).cloned().collect();
    for s in &missing_predictions {
        eprintln!("warning: {s}: label file has no prediction sidecar");
    }
    for s in &missing_ground_truth {
        eprintln!("warning: {s}: prediction sidecar has no label file");
    }
    let stems: Vec<&String> = gts.keys().filter(|s| preds.contains_key(*s)).collect();
    if stems.is_empty() {
        anyhow::bail!("no stems in common between {} and {}", args.pred.display(), args.gt.display());
    }

    let images: Vec<EvalImage> = stems
        .par_iter()
        .map(|stem| -> anyhow::Result<EvalImage> {
            let sc = load_sidecar(&preds[*stem])?;
            let label_path = &gts[*stem];
            let text = fs::read_to_string(label_path)?;
            let ground_truth =
                parse_label_file(&text, inventory.len()).map_err(|e| e.in_file(label_path))?;
            Ok(EvalImage {
                detections: sc.detections().map_err(|e| e.in_file(&preds[*stem]))?,
                ground_truth,
            })
        })
        .collect::<anyhow::Result<_>>()?;

    let report = evaluate(&images, inventory.len(), Some(&inventory), &eval_cfg)?;
    let output = EvalOutput {
        report: &report,
        missing_predictions,
        missing_ground_truth,
    };

    if let Some(out) = &args.out {
        write_file(&out.join("report.json"), to_json(&output)?)?;
        write_file(&out.join("report.txt"), report.to_table())?;
        write_file(&out.join("confusion.csv"), confusion_csv(&report.confusion, &inventory.names()))?;
    }
    if let Some(png) = &args.confusion_png {
        if let Some(parent) = png.parent() {
            fs::create_dir_all(parent)?;
        }
        confusion_image(&report.confusion).save(png)?;
    }
    match args.format {
        OutputFormat::Json => print_json(&output),
        OutputFormat::Text => {
            print!("{}", report.to_table());
            Ok(())
        }
    }
}

/// Rows are ground truth, columns predictions; the last of each is background.
fn confusion_csv(cm: &ConfusionMatrix, names: &[String]) -> String {
    let label = |i: usize| names.get(i).cloned().unwrap_or_else(|| "background".into());
    let mut s = String::from("gt\\pred");
    for c in 0..=cm.num_classes {
        write!(s, ",{}", label(c)).unwrap();
    }
    s.push('\n');
    for (r, row) in cm.counts.iter().enumerate() {
        s.push_str(&label(r));
        for v in row {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}
