//! Breathing signal recovery and rate estimation.

pub mod filter;
pub mod incremental;
pub mod rate;
pub mod resample;
pub mod roi;
pub mod signal;
pub mod voxel;

pub use filter::{bandpass, Bandpass, BandpassSpec};
pub use incremental::{EstimatorEvent, IncrementalEstimator};
pub use rate::{estimate_rate, RateEstimate, RateEstimator, RateParams};
pub use resample::{resample_uniform, StreamingResampler};
pub use roi::Roi;
pub use signal::{BreathingSignal, Stage};
pub use voxel::{integrate_sequence, voxel_integrate_frame, FloorMode, VoxelIntegrator, VoxelParams};
