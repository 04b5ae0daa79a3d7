//! Contact-free breathing measurement from radiometric thermal video.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`frame`], [`codec`], [`emissivity`] and [`synth`] hold, store and
//!    generate temperature frames.
//! 2. [`estimator`] sums unit-temperature voxels over a hand-picked nostril
//!    ROI to get a 1-D breathing signal, resamples and bandpasses it, and reads
//!    the breathing rate off a sliding 30 s periodogram.
//! 3. [`rvs`] turns the filtered signal into a normalised respiration
//!    variability spectrogram that can be exported as an image.
//!
//! [`pipeline::run_pipeline`] chains everything for a recorded sequence;
//! [`estimator::IncrementalEstimator`] does the same one frame at a time.

pub mod codec;
pub mod emissivity;
pub mod error;
pub mod estimator;
pub mod export;
pub mod frame;
pub mod pipeline;
pub mod rvs;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use frame::{SequenceMeta, ThermalFrame, ThermalSequence};
