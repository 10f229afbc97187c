//! Baybayin character-instance detection toolkit.
//!
//! Preprocessing, dataset tooling, detection post-processing, transliteration
//! and evaluation around a pluggable detector. The detector itself lives
//! outside the crate and talks to it through sidecar JSON files or a line
//! protocol (see [`runtime`]).

pub mod dataset;
pub mod detection;
pub mod error;
pub mod eval;
pub mod imgproc;
pub mod rng;
pub mod runtime;
pub mod script;

pub use error::{Error, Result};
