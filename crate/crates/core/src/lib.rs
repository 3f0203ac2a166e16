//! Daily Phonotrauma Index: frame-level voice features from a neck-surface
//! accelerometer, day-level distributional features, a logistic classifier
//! and the experiment drivers that evaluate it.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod features;
pub mod io;
pub mod model;
pub mod rng;
pub mod signal;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
