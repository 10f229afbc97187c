use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::backend::Detector;
use crate::detection::{assemble_reading_order, PostProcess};
use crate::error::{Error, Result};
use crate::imgproc::{run_pipeline, PipelineConfig, Raster};

/// Per-image time spent in each stage, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageSample {
    pub preprocess_ms: f64,
    pub detect_ms: f64,
    pub postprocess_ms: f64,
}

impl StageSample {
    pub fn detect_only(ms: f64) -> Self {
        Self {
            detect_ms: ms,
            ..Self::default()
        }
    }

    pub fn total_ms(&self) -> f64 {
        self.preprocess_ms + self.detect_ms + self.postprocess_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub backend: String,
    pub samples: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub fps: f64,
    /// Mean time per stage.
    pub stages: StageSample,
}

/// Linear-interpolated percentile of sorted values.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl BenchReport {
    /// Statistics over per-image latencies; each latency is the sum of its
    /// stages.
    pub fn from_samples(backend: impl Into<String>, samples: &[StageSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("no latency samples"));
        }
        let mut totals: Vec<f64> = samples.iter().map(StageSample::total_ms).collect();
        if totals.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("latencies must be finite and nonnegative"));
        }
        totals.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mean = totals.iter().sum::<f64>() / n;
        if mean <= 0.0 {
            return Err(Error::invalid("mean latency is zero"));
        }
        let stage_mean = |f: fn(&StageSample) -> f64| samples.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            backend: backend.into(),
            samples: samples.len(),
            mean_ms: mean,
            p50_ms: percentile(&totals, 0.5),
            p95_ms: percentile(&totals, 0.95),
            min_ms: totals[0],
            max_ms: totals[totals.len() - 1],
            fps: 1000.0 / mean,
            stages: StageSample {
                preprocess_ms: stage_mean(|s| s.preprocess_ms),
                detect_ms: stage_mean(|s| s.detect_ms),
                postprocess_ms: stage_mean(|s| s.postprocess_ms),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Full passes over the images whose timings are discarded.
    pub warmup: u32,
    /// Timed passes; at least one.
    pub repeats: u32,
    /// When set, each image is loaded and preprocessed inside the timed
    /// preprocess stage.
    pub pipeline: Option<PipelineConfig>,
    pub post: PostProcess,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            warmup: 1,
            repeats: 5,
            pipeline: None,
            post: PostProcess::default(),
        }
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Times each image through preprocess, detect and postprocess.
pub fn benchmark(images: &[PathBuf], detector: &mut dyn Detector, opts: &BenchOptions) -> Result<BenchReport> {
    if opts.repeats == 0 {
        return Err(Error::config("repeats must be at least 1"));
    }
    if images.is_empty() {
        return Err(Error::invalid("no images to benchmark"));
    }
    if let Some(p) = &opts.pipeline {
        p.validate()?;
    }
    opts.post.validate()?;
    let mut samples = Vec::with_capacity(images.len() * opts.repeats as usize);
    for round in 0..opts.warmup + opts.repeats {
        for img in images {
            let t = Instant::now();
            if let Some(p) = &opts.pipeline {
                let r = Raster::load(img).map_err(|e| e.in_file(img))?;
                std::hint::black_box(run_pipeline(&r, p)?);
            }
            let preprocess_ms = ms_since(t);

            let t = Instant::now();
            let out = detector.detect(std::slice::from_ref(img))?;
            let wall = ms_since(t);
            let detect_ms = detector.reported_latency_ms().unwrap_or(wall);

            let t = Instant::now();
            for sc in &out {
                let kept = opts.post.apply(&sc.detections()?);
                std::hint::black_box(assemble_reading_order(&kept));
            }
            let postprocess_ms = ms_since(t);

            if round >= opts.warmup {
                samples.push(StageSample {
                    preprocess_ms,
                    detect_ms,
                    postprocess_ms,
                });
            }
        }
    }
    BenchReport::from_samples(detector.label(), &samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fps_from_mean() {
        let r = BenchReport::from_samples("x", &[StageSample::detect_only(3.3)]).unwrap();
        assert!((r.fps - 1000.0 / 3.3).abs() < 1e-9);
        assert_eq!(r.fps.round(), 303.0);
        let r = BenchReport::from_samples("x", &[StageSample::detect_only(83.2); 4]).unwrap();
        assert_eq!(r.fps.round(), 12.0);
    }

    #[test]
    fn statistics() {
        let s: Vec<_> = [4.0, 1.0, 3.0, 2.0, 10.0].iter().map(|&v| StageSample::detect_only(v)).collect();
        let r = BenchReport::from_samples("x", &s).unwrap();
        assert_eq!((r.min_ms, r.max_ms, r.p50_ms, r.mean_ms), (1.0, 10.0, 3.0, 4.0));
        assert!((r.p95_ms - 8.8).abs() < 1e-12);
        assert!(r.p50_ms <= r.p95_ms);
    }

    #[test]
    fn rejects_empty_and_zero() {
        assert!(BenchReport::from_samples("x", &[]).is_err());
        assert!(BenchReport::from_samples("x", &[StageSample::default()]).is_err());
    }
}
