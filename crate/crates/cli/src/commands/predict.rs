use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use baybayin_core::dataset::file_stem;
use baybayin_core::detection::{assemble_reading_order, Detection, PostProcess};
use baybayin_core::imgproc::{run_pipeline_traced, LetterboxTransform, PipelineConfig, Raster};
use baybayin_core::runtime::{detect, save_sidecar, DetectionSidecar, ProcessMode};
use baybayin_core::script::{
    disambiguate, transliterate_lines, AmbiguitySet, ClassInventory, Disambiguation, Lexicon,
};

use super::{collect_images, print_json};
use crate::args::{OutputFormat, PredictArgs};
use crate::config::CliConfig;
use crate::render::draw_detections;

#[derive(Debug, Serialize)]
pub struct PredictedGlyph {
    pub class_id: u32,
    pub latin: String,
    pub confidence: f64,
    pub bbox: [f64; 4],
}

#[derive(Debug, Serialize)]
pub struct WordChoice {
    pub reading: String,
    pub word: String,
    pub distance: usize,
}

#[derive(Debug, Serialize)]
pub struct PredictResult {
    pub image: String,
    pub width: u32,
    pub height: u32,
    /// Final text: lexicon words when a lexicon is given, else the reading.
    pub text: String,
    /// Canonical a/i/u reading, lines joined by a space.
    pub reading: String,
    pub lines: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<WordChoice>>,
    /// Kept detections in reading order.
    pub detections: Vec<PredictedGlyph>,
}

#[derive(Serialize)]
struct PredictOutput {
    results: Vec<PredictResult>,
}

struct Prepared {
    source: PathBuf,
    detector_input: PathBuf,
    letterbox: Option<LetterboxTransform>,
}

pub fn run(args: PredictArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    let post = args.detection.resolve(cfg)?;
    let inventory = args.inventory.resolve(cfg)?;
    let lexicon = crate::args::load_lexicon(args.lexicon.as_ref(), cfg)?;
    let pipeline = args.pipeline.resolve(cfg)?;
    // validate the backend flags before touching any image
    drop(args.backend.build(cfg, ProcessMode::Batch)?);
    let images = collect_images(&args.images)?;

    let scratch = if args.preprocess {
        let dir = match &args.out {
            Some(o) => o.join("preprocessed"),
            None => std::env::temp_dir().join(format!("baybayin-predict-{}", std::process::id())),
        };
        std::fs::create_dir_all(&dir)?;
        Some(dir)
    } else {
        None
    };
    let prepared: Vec<Prepared> = images
        .par_iter()
        .map(|img| prepare(img, scratch.as_deref(), &pipeline))
        .collect::<anyhow::Result<_>>()?;

    let chunk = prepared.len().div_ceil(rayon::current_num_threads()).max(1);
    let sidecars: Vec<DetectionSidecar> = prepared
        .par_chunks(chunk)
        .map(|part| -> anyhow::Result<Vec<DetectionSidecar>> {
            let mut detector = args.backend.build(cfg, ProcessMode::Batch)?;
            let inputs: Vec<PathBuf> = part.iter().map(|p| p.detector_input.clone()).collect();
            Ok(detect(detector.as_mut(), &inputs, Some(&post))?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if args.out.is_none() {
        if let Some(dir) = &scratch {
            let _ = std::fs::remove_dir_all(dir);
        }
    }

    let results: Vec<PredictResult> = prepared
        .iter()
        .zip(&sidecars)
        .map(|(p, sc)| finish(p, sc, &post, &inventory, lexicon.as_ref()))
        .collect::<anyhow::Result<_>>()?;

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        for (p, r) in prepared.iter().zip(&results) {
            let stem = file_stem(&p.source);
            let sc = sidecar_of(r, &stem)?;
            save_sidecar(out.join(format!("{stem}.json")), &sc)?;
            if args.render {
                let img = Raster::load(&p.source)?;
                let overlay = draw_detections(&img, &sc.detections()?, &inventory);
                overlay
                    .save(out.join(format!("{stem}.png")))
                    .with_context(|| format!("writing overlay for {stem}"))?;
            }
        }
    }

    for r in &results {
        if r.detections.is_empty() {
            eprintln!("warning: {}: no detections kept", r.image);
        }
    }
    match args.format {
        OutputFormat::Json => print_json(&PredictOutput { results }),
        OutputFormat::Text => {
            for r in &results {
                println!("{}", r.text);
            }
            Ok(())
        }
    }
}

fn prepare(img: &Path, scratch: Option<&Path>, pipeline: &PipelineConfig) -> anyhow::Result<Prepared> {
    let Some(dir) = scratch else {
        return Ok(Prepared {
            source: img.to_path_buf(),
            detector_input: img.to_path_buf(),
            letterbox: None,
        });
    };
    let raster = Raster::load(img).with_context(|| format!("loading {}", img.display()))?;
    let traced = run_pipeline_traced(&raster, pipeline)?;
    let out = dir.join(format!("{}.png", file_stem(img)));
    traced.raster.save(&out)?;
    Ok(Prepared {
        source: img.to_path_buf(),
        detector_input: out,
        letterbox: traced.letterbox,
    })
}

fn finish(
    p: &Prepared,
    sc: &DetectionSidecar,
    post: &PostProcess,
    inventory: &ClassInventory,
    lexicon: Option<&Lexicon>,
) -> anyhow::Result<PredictResult> {
    let mut dets = sc.detections()?;
    let (mut width, mut height) = (sc.width, sc.height);
    if let Some(lb) = &p.letterbox {
        dets = dets
            .into_iter()
            .filter_map(|d| {
                lb.from_canvas(&d.bbox).map(|bbox| Detection { bbox, ..d })
            })
            .collect();
        dets = post.apply(&dets);
        (width, height) = (lb.src_width, lb.src_height);
    }
    let order = assemble_reading_order(&dets);
    let lines = transliterate_lines(&order, &dets, inventory)
        .with_context(|| format!("transliterating {}", p.source.display()))?;
    let reading = lines.join(" ");
    let words = match lexicon {
        Some(lex) => {
            let amb = AmbiguitySet::default();
            Some(
                lines
                    .iter()
                    .map(|w| {
                        disambiguate(w, lex, &amb).map(|Disambiguation { word, distance }| WordChoice {
                            reading: w.clone(),
                            word,
                            distance,
                        })
                    })
                    .collect::<baybayin_core::Result<Vec<_>>>()?,
            )
        }
        None => None,
    };
    let text = match &words {
        Some(ws) => ws.iter().map(|w| w.word.as_str()).collect::<Vec<_>>().join(" "),
        None => reading.clone(),
    };
    let detections = order
        .flatten()
        .map(|i| {
            let d = &dets[i];
            Ok(PredictedGlyph {
                class_id: d.class_id,
                latin: inventory.get(d.class_id)?.latin.clone(),
                confidence: d.confidence,
                bbox: d.bbox.to_array(),
            })
        })
        .collect::<baybayin_core::Result<_>>()?;
    Ok(PredictResult {
        image: p.source.display().to_string(),
        width,
        height,
        text,
        reading,
        lines,
        words,
        detections,
    })
}

fn sidecar_of(r: &PredictResult, stem: &str) -> anyhow::Result<DetectionSidecar> {
    let dets: Vec<Detection> = r
        .detections
        .iter()
        .map(|g| {
            let [cx, cy, w, h] = g.bbox;
            Ok(Detection {
                bbox: baybayin_core::dataset::BBox::new(cx, cy, w, h)?,
                class_id: g.class_id,
                confidence: g.confidence,
            })
        })
        .collect::<baybayin_core::Result<_>>()?;
    Ok(DetectionSidecar::from_detections(stem, r.width, r.height, &dets))
}
