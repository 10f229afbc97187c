use baybayin_core::runtime::{benchmark, BenchOptions, ProcessMode};

use super::{collect_images, print_json};
use crate::args::BenchArgs;
use crate::config::CliConfig;

pub fn run(args: BenchArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    let post = args.detection.resolve(cfg)?;
    let pipeline = if args.preprocess {
        Some(args.pipeline.resolve(cfg)?)
    } else {
        None
    };
    let mut detector = args.backend.build(cfg, ProcessMode::Interactive)?;
    let images = collect_images(&args.images)?;
    let opts = BenchOptions {
        warmup: args.warmup,
        repeats: args.repeats,
        pipeline,
        post,
    };
    let report = benchmark(&images, detector.as_mut(), &opts)?;
    print_json(&report)
}
