use std::fs;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use baybayin_core::dataset::{
    augment as augment_image, layout_dirs, split_dataset, write_label_file, DatasetIndex,
    DatasetItem, Split, DEFAULT_AUGMENT_VARIANTS, DEFAULT_SPLIT_FRACTIONS,
};
use baybayin_core::imgproc::Raster;
use baybayin_core::rng::derive_seed;

use super::{print_json, write_file};
use crate::args::{require_exists, AugmentArgs, SplitArgs};
use crate::config::CliConfig;
use crate::UsageError;

#[derive(Serialize)]
struct AugmentSummary {
    split: Split,
    originals: usize,
    variants_per_image: u32,
    written: usize,
    boxes_dropped: usize,
}

pub fn augment(args: AugmentArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    require_exists(&args.dataset)?;
    let split: Split = args.split.parse()?;
    let inventory = args.inventory.resolve(cfg)?;
    let mut spec = cfg.augment.clone();
    if let Some(r) = args.rotation {
        spec.rotation_deg = [-r.abs(), r.abs()];
    }
    if let Some(s) = args.shear {
        spec.shear_deg = [-s.abs(), s.abs()];
    }
    if let Some(n) = args.noise_sigma {
        spec.noise_sigma = n;
    }
    spec.validate()?;
    let seed = args.seed.or(cfg.seed).unwrap_or(spec.seed);
    let variants = args.variants.unwrap_or(DEFAULT_AUGMENT_VARIANTS);

    let index = DatasetIndex::load(&args.dataset, Some(split), inventory.len())?;
    let (img_out, lbl_out) = layout_dirs(&args.output, Some(split));
    fs::create_dir_all(&img_out)?;
    fs::create_dir_all(&lbl_out)?;

    let per_item: Vec<anyhow::Result<(usize, usize)>> = index
        .items
        .par_iter()
        .map(|item| {
            let stem = item.stem();
            let raster = Raster::load(&item.image)?;
            raster.save(img_out.join(format!("{stem}.png")))?;
            write_file(&lbl_out.join(format!("{stem}.txt")), write_label_file(&item.annotations))?;
            let mut written = 1;
            let mut dropped = 0;
            for k in 0..variants {
                let mut s = spec.clone();
                s.seed = derive_seed(seed, &format!("{stem}#{k}"));
                let (img, anns) = augment_image(&raster, &item.annotations, &s)
                    .with_context(|| format!("augmenting {}", item.image.display()))?;
                dropped += item.annotations.len() - anns.len();
                let name = format!("{stem}_aug{k}");
                img.save(img_out.join(format!("{name}.png")))?;
                write_file(&lbl_out.join(format!("{name}.txt")), write_label_file(&anns))?;
                written += 1;
            }
            Ok((written, dropped))
        })
        .collect();

    let mut summary = AugmentSummary {
        split,
        originals: index.len(),
        variants_per_image: variants,
        written: 0,
        boxes_dropped: 0,
    };
    for r in per_item {
        let (w, d) = r?;
        summary.written += w;
        summary.boxes_dropped += d;
    }
    copy_classes(&args.dataset, &args.output)?;
    print_json(&summary)
}

#[derive(Serialize)]
struct SplitSummary {
    seed: u64,
    fractions: [f64; 3],
    train: usize,
    val: usize,
    test: usize,
}

pub fn split(args: SplitArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    require_exists(&args.dataset)?;
    let inventory = args.inventory.resolve(cfg)?;
    let fractions: [f64; 3] = match &args.fractions {
        Some(v) => v
            .as_slice()
            .try_into()
            .map_err(|_| UsageError("--fractions takes exactly three values".into()))?,
        None => DEFAULT_SPLIT_FRACTIONS,
    };
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let index = DatasetIndex::load(&args.dataset, None, inventory.len())?;
    let parts = split_dataset(&index, fractions, seed)?;
    for part in &parts {
        let (img_dir, lbl_dir) = layout_dirs(&args.output, part.split);
        fs::create_dir_all(&img_dir)?;
        fs::create_dir_all(&lbl_dir)?;
        part.items
            .par_iter()
            .map(|item| copy_item(item, &img_dir, &lbl_dir))
            .collect::<anyhow::Result<Vec<()>>>()?;
    }
    copy_classes(&args.dataset, &args.output)?;
    print_json(&SplitSummary {
        seed,
        fractions,
        train: parts[0].len(),
        val: parts[1].len(),
        test: parts[2].len(),
    })
}

fn copy_item(item: &DatasetItem, img_dir: &Path, lbl_dir: &Path) -> anyhow::Result<()> {
    let name = item.image.file_name().context("image path has no file name")?;
    fs::copy(&item.image, img_dir.join(name))
        .with_context(|| format!("copying {}", item.image.display()))?;
    write_file(
        &lbl_dir.join(format!("{}.txt", item.stem())),
        write_label_file(&item.annotations),
    )
}

fn copy_classes(from: &Path, to: &Path) -> anyhow::Result<()> {
    let src = from.join("classes.txt");
    if src.is_file() {
        fs::copy(&src, to.join("classes.txt"))?;
    }
    Ok(())
}
