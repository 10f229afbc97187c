use baybayin_core::imgproc::Raster;
use baybayin_core::runtime::load_sidecar;

use crate::args::{require_exists, RenderArgs};
use crate::config::CliConfig;
use crate::render::draw_detections;

pub fn run(args: RenderArgs, cfg: &CliConfig) -> anyhow::Result<()> {
    require_exists(&args.image)?;
    require_exists(&args.sidecar)?;
    let inventory = args.inventory.resolve(cfg)?;
    let img = Raster::load(&args.image)?;
    let sc = load_sidecar(&args.sidecar)?;
    let overlay = draw_detections(&img, &sc.detections()?, &inventory);
    if let Some(parent) = args.output.parent() {
        std::fs::create_dir_all(parent)?;
    }
    overlay.save(&args.output)?;
    Ok(())
}
