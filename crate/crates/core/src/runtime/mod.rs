//! Detector boundary and throughput benchmarking.
//!
//! Detections reach the toolkit as sidecar JSON documents, either replayed
//! from a directory or produced by an external process over a line protocol:
//! one image path per input line, one compact sidecar document per output
//! line, in order. A nonzero exit status is a failure.

mod backend;
mod bench;
mod sidecar;

pub use backend::{
    detect, Detector, FixedLatencyDetector, ProcessDetector, ProcessMode, ReplayDetector,
    SleepDetector, FIXED_LATENCY_LABEL, PROCESS_LABEL, REPLAY_LABEL, SLEEP_LABEL,
};
pub use bench::{benchmark, BenchOptions, BenchReport, StageSample};
pub use sidecar::{load_sidecar, save_sidecar, DetectionSidecar, SidecarDetection};
