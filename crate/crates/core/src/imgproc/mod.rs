//! Deterministic image preprocessing: grayscale, sharpening, TV denoising,
//! Otsu binarization and letterbox normalization, individually or chained.
//!
//! Ink is 0 and background 255 after binarization.

mod filters;
mod letterbox;
mod otsu;
mod pipeline;
mod raster;
mod tv;

pub use filters::{sharpen, to_grayscale};
pub use letterbox::{letterbox_normalize, resize_bilinear, LetterboxTransform, LETTERBOX_PAD_VALUE};
pub use otsu::{apply_threshold, otsu_binarize, otsu_threshold, OtsuResult, TieBreak, MAX_OTSU_PIXELS};
pub use pipeline::{
    run_pipeline, run_pipeline_traced, PipelineConfig, PipelineOutput, Stage,
    DEFAULT_SHARPEN_STRENGTH, DEFAULT_STAGE_ORDER, DEFAULT_TARGET_SIZE, TEXT_STAGE_ORDER,
};
pub use raster::Raster;
pub use tv::{rof_objective, tv_denoise, DEFAULT_TV_ITERATIONS, DEFAULT_TV_WEIGHT};

pub(crate) use filters::luma;
