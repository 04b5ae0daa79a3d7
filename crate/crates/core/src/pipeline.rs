//! Batch composition of every stage: emissivity correction, voxel
//! integration, resampling, bandpass, rate estimation and the RVS.

use crate::emissivity::correct_sequence;
use crate::error::Result;
use crate::estimator::filter::{apply, Bandpass, BandpassSpec};
use crate::estimator::rate::{RateEstimate, RateEstimator, RateParams};
use crate::estimator::resample::resample_uniform;
use crate::estimator::roi::Roi;
use crate::estimator::signal::BreathingSignal;
use crate::estimator::voxel::{integrate_sequence, VoxelParams};
use crate::frame::ThermalSequence;
use crate::rvs::{normalize, spectrogram, Rvs, Spectrogram, RvsParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub voxel: VoxelParams,
    pub band: BandpassSpec,
    pub rate_window_s: f64,
    pub rate_hop_s: f64,
    pub rvs: RvsParams,
    /// Uniform resampling rate, Hz.
    pub fs: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            voxel: VoxelParams::default(),
            band: BandpassSpec::default(),
            rate_window_s: 30.0,
            rate_hop_s: 1.0,
            rvs: RvsParams::default(),
            fs: 9.0,
        }
    }
}

impl PipelineParams {
    /// Rate parameters; the peak search band is the filter passband.
    pub fn rate_params(&self) -> RateParams {
        RateParams {
            window_s: self.rate_window_s,
            hop_s: self.rate_hop_s,
            low_hz: self.band.low_hz,
            high_hz: self.band.high_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.voxel.validate()?;
        Bandpass::design(&self.band, self.fs)?;
        RateEstimator::new(self.rate_params(), self.fs)?;
        self.rvs.validate(self.fs)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub raw: BreathingSignal,
    pub uniform: BreathingSignal,
    pub filtered: BreathingSignal,
    pub rates: Vec<RateEstimate>,
    pub spectrogram: Spectrogram,
    pub rvs: Rvs,
}

/// Runs every stage on a recorded sequence, correcting with its stored emissivity.
pub fn run_pipeline(seq: &ThermalSequence, roi: &Roi, params: &PipelineParams) -> Result<PipelineOutput> {
    params.validate()?;
    roi.check_bounds(seq.meta().width, seq.meta().height)?;
    let corrected = correct_sequence(seq)?;
    let raw = integrate_sequence(&corrected, roi, &params.voxel)?;
    let uniform = resample_uniform(&raw, params.fs)?;
    let filter = Bandpass::design(&params.band, params.fs)?;
    let filtered = apply(&filter, &uniform)?;
    let rates = RateEstimator::new(params.rate_params(), params.fs)?.estimate(&filtered)?;
    let spectrogram = spectrogram(&filtered, &params.rvs)?;
    let rvs = normalize(spectrogram.clone());
    Ok(PipelineOutput {
        raw,
        uniform,
        filtered,
        rates,
        spectrogram,
        rvs,
    })
}
