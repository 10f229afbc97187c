use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use baybayin_core::dataset::file_stem;
use baybayin_core::imgproc::{run_pipeline_traced, PipelineConfig, Raster, Stage};

use super::{collect_images, print_json};
use crate::args::{require_exists, PreprocessArgs};
use crate::config::CliConfig;

#[derive(Serialize)]
struct Summary {
    processed: usize,
    failed: Vec<String>,
    outputs: Vec<PathBuf>,
}

pub fn run(args: PreprocessArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    let pipeline = args.pipeline.resolve(cfg)?;
    require_exists(&args.input)?;
    let base = if args.input.is_dir() {
        args.input.clone()
    } else {
        args.input.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    let images = collect_images(std::slice::from_ref(&args.input))?;

    let results: Vec<(PathBuf, anyhow::Result<PathBuf>)> = images
        .par_iter()
        .map(|img| {
            let r = process_one(img, &base, &args.output, &pipeline, args.dump_stages);
            (img.clone(), r)
        })
        .collect();

    let mut summary = Summary {
        processed: 0,
        failed: Vec::new(),
        outputs: Vec::new(),
    };
    for (img, r) in results {
        match r {
            Ok(out) => {
                summary.processed += 1;
                summary.outputs.push(out);
            }
            Err(e) => {
                eprintln!("warning: {}: {e:#}", img.display());
                summary.failed.push(img.display().to_string());
            }
        }
    }
    print_json(&summary)?;
    if summary.processed == 0 && !summary.failed.is_empty() {
        anyhow::bail!("every input failed to preprocess");
    }
    Ok(())
}

fn process_one(
    img: &Path,
    base: &Path,
    output: &Path,
    pipeline: &PipelineConfig,
    dump: bool,
) -> anyhow::Result<PathBuf> {
    let raster = Raster::load(img)?;
    let traced = run_pipeline_traced(&raster, pipeline)?;
    let rel = img.strip_prefix(base).unwrap_or(img).with_extension("png");
    let out = output.join(rel);
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    traced.raster.save(&out).with_context(|| format!("writing {}", out.display()))?;

    if dump {
        let dir = output.join("stages").join(file_stem(img));
        std::fs::create_dir_all(&dir)?;
        raster.save(dir.join("0_input.png"))?;
        let mut k = 1;
        for (stage, r) in &traced.stages {
            // the canvas is not part of the figure-style strip
            if *stage == Stage::Normalize {
                continue;
            }
            r.save(dir.join(format!("{k}_{}.png", stage.name())))?;
            k += 1;
        }
    }
    Ok(out)
}
