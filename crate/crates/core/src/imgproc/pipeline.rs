use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    letterbox_normalize, otsu_binarize, sharpen, to_grayscale, tv_denoise, LetterboxTransform,
    Raster, TieBreak, DEFAULT_TV_ITERATIONS, DEFAULT_TV_WEIGHT,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Grayscale,
    Sharpen,
    Denoise,
    Binarize,
    Normalize,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Grayscale => "grayscale",
            Stage::Sharpen => "sharpen",
            Stage::Denoise => "denoise",
            Stage::Binarize => "binarize",
            Stage::Normalize => "normalize",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grayscale" | "gray" => Ok(Stage::Grayscale),
            "sharpen" => Ok(Stage::Sharpen),
            "denoise" => Ok(Stage::Denoise),
            "binarize" => Ok(Stage::Binarize),
            "normalize" => Ok(Stage::Normalize),
            other => Err(Error::config(format!("unknown pipeline stage `{other}`"))),
        }
    }
}

/// Grayscale, sharpen, denoise, binarize, normalize.
pub const DEFAULT_STAGE_ORDER: [Stage; 5] = [
    Stage::Grayscale,
    Stage::Sharpen,
    Stage::Denoise,
    Stage::Binarize,
    Stage::Normalize,
];

/// Binarize before denoise, the alternative ordering.
pub const TEXT_STAGE_ORDER: [Stage; 5] = [
    Stage::Grayscale,
    Stage::Sharpen,
    Stage::Binarize,
    Stage::Denoise,
    Stage::Normalize,
];

pub const DEFAULT_SHARPEN_STRENGTH: f64 = 1.0;
pub const DEFAULT_TARGET_SIZE: u32 = 640;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stage_order: Vec<Stage>,
    pub tv_weight: f64,
    pub tv_iterations: u32,
    pub sharpen_strength: f64,
    pub target_size: u32,
    pub otsu_tie_break: TieBreak,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage_order: DEFAULT_STAGE_ORDER.to_vec(),
            tv_weight: DEFAULT_TV_WEIGHT,
            tv_iterations: DEFAULT_TV_ITERATIONS,
            sharpen_strength: DEFAULT_SHARPEN_STRENGTH,
            target_size: DEFAULT_TARGET_SIZE,
            otsu_tie_break: TieBreak::Lowest,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.stage_order.iter().enumerate() {
            if self.stage_order[..i].contains(s) {
                return Err(Error::config(format!("stage `{s}` appears twice")));
            }
        }
        if let Some(pos) = self.stage_order.iter().position(|&s| s == Stage::Normalize) {
            if pos + 1 != self.stage_order.len() {
                return Err(Error::config("normalize must be the last stage"));
            }
        }
        if self.tv_iterations == 0 {
            return Err(Error::config("tv_iterations must be >= 1"));
        }
        if !(self.tv_weight >= 0.0 && self.tv_weight.is_finite()) {
            return Err(Error::config("tv_weight must be a finite value >= 0"));
        }
        if !(self.sharpen_strength >= 0.0 && self.sharpen_strength.is_finite()) {
            return Err(Error::config("sharpen_strength must be a finite value >= 0"));
        }
        if self.target_size == 0 {
            return Err(Error::config("target_size must be >= 1"));
        }
        Ok(())
    }
}

/// Final raster plus everything produced along the way.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub raster: Raster,
    /// Output of each stage, in execution order.
    pub stages: Vec<(Stage, Raster)>,
    /// Present when a normalize stage ran.
    pub letterbox: Option<LetterboxTransform>,
}

pub fn run_pipeline(img: &Raster, cfg: &PipelineConfig) -> Result<Raster> {
    Ok(run_pipeline_traced(img, cfg)?.raster)
}

pub fn run_pipeline_traced(img: &Raster, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut current = img.clone();
    let mut stages = Vec::with_capacity(cfg.stage_order.len());
    let mut letterbox = None;
    for &stage in &cfg.stage_order {
        if !current.is_gray() && matches!(stage, Stage::Sharpen | Stage::Denoise | Stage::Binarize) {
            return Err(Error::config(format!(
                "stage `{stage}` needs a grayscale image; put `grayscale` before it"
            )));
        }
        current = match stage {
            Stage::Grayscale => to_grayscale(&current),
            Stage::Sharpen => sharpen(&current, cfg.sharpen_strength)?,
            Stage::Denoise => tv_denoise(&current, cfg.tv_weight, cfg.tv_iterations)?,
            Stage::Binarize => otsu_binarize(&current, cfg.otsu_tie_break)?.binary,
            Stage::Normalize => {
                let (r, t) = letterbox_normalize(&current, cfg.target_size)?;
                letterbox = Some(t);
                r
            }
        };
        stages.push((stage, current.clone()));
    }
    Ok(PipelineOutput {
        raster: current,
        stages,
        letterbox,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb_sample() -> Raster {
        let mut data = Vec::new();
        for y in 0..48u32 {
            for x in 0..64u32 {
                let ink = (20..44).contains(&x) && (y % 12 < 4);
                let v: u8 = if ink { 30 } else { 220 };
                data.extend_from_slice(&[v, v.saturating_sub(10), v / 2 + 60]);
            }
        }
        Raster::new(64, 48, 3, data).unwrap()
    }

    #[test]
    fn empty_order_is_identity() {
        let cfg = PipelineConfig {
            stage_order: vec![],
            ..Default::default()
        };
        let img = rgb_sample();
        assert_eq!(run_pipeline(&img, &cfg).unwrap(), img);
    }

    #[test]
    fn default_order_gives_binary_square() {
        let cfg = PipelineConfig {
            target_size: 96,
            ..Default::default()
        };
        let out = run_pipeline(&rgb_sample(), &cfg).unwrap();
        assert_eq!((out.width(), out.height(), out.channels()), (96, 96, 1));
    }

    #[test]
    fn binarize_on_rgb_is_config_error() {
        let cfg = PipelineConfig {
            stage_order: vec![Stage::Binarize, Stage::Grayscale],
            ..Default::default()
        };
        assert!(matches!(
            run_pipeline(&rgb_sample(), &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn validation() {
        let dup = PipelineConfig {
            stage_order: vec![Stage::Sharpen, Stage::Sharpen],
            ..Default::default()
        };
        assert!(dup.validate().is_err());
        let late = PipelineConfig {
            stage_order: vec![Stage::Normalize, Stage::Grayscale],
            ..Default::default()
        };
        assert!(late.validate().is_err());
        let iters = PipelineConfig {
            tv_iterations: 0,
            ..Default::default()
        };
        assert!(iters.validate().is_err());
    }

    #[test]
    fn parses_stage_names() {
        assert_eq!("Binarize".parse::<Stage>().unwrap(), Stage::Binarize);
        assert!("blur".parse::<Stage>().is_err());
    }
}
