//! Frame-at-a-time estimator for live replay.
//!
//! Each frame yields at most one raw signal sample. Whenever the uniform
//! signal grows to the end of a rate window (or RVS window), the bandpass is
//! re-run over the whole uniform prefix and the newest window is analysed, so
//! every emitted value equals the batch computation on the same prefix.
//! Zero-phase filtering needs the future, so estimates near the live edge can
//! differ slightly from a batch run over a longer recording.

use crate::emissivity::{correction_factor, emissivity_correct};
use crate::error::{Error, Result};
use crate::estimator::filter::{apply, Bandpass};
use crate::estimator::rate::{RateEstimate, RateEstimator};
use crate::estimator::resample::StreamingResampler;
use crate::estimator::roi::Roi;
use crate::estimator::signal::BreathingSignal;
use crate::estimator::voxel::VoxelIntegrator;
use crate::frame::ThermalFrame;
use crate::pipeline::PipelineParams;
use crate::rvs::{RvsColumn, RvsPlan};

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorEvent {
    /// One raw voxel-count sample.
    Signal { t_s: f64, value: f64 },
    Rate(RateEstimate),
    RvsColumn(RvsColumn),
}

#[derive(Debug)]
pub struct IncrementalEstimator {
    params: PipelineParams,
    emissivity: f64,
    integrator: VoxelIntegrator,
    resampler: StreamingResampler,
    uniform: Vec<f64>,
    filter: Bandpass,
    rate: RateEstimator,
    rvs: RvsPlan,
    rates_emitted: usize,
    columns_emitted: usize,
    rvs_running_max: f64,
}

impl IncrementalEstimator {
    /// `emissivity` is applied to each incoming frame; pass 1.0 for frames
    /// that are already corrected.
    pub fn new(roi: Roi, params: PipelineParams, emissivity: f64) -> Result<Self> {
        params.validate()?;
        correction_factor(emissivity)?;
        Ok(Self {
            integrator: VoxelIntegrator::new(roi, params.voxel)?,
            resampler: StreamingResampler::new(params.fs)?,
            uniform: Vec::new(),
            filter: Bandpass::design(&params.band, params.fs)?,
            rate: RateEstimator::new(params.rate_params(), params.fs)?,
            rvs: RvsPlan::new(params.rvs, params.fs)?,
            params,
            emissivity,
            rates_emitted: 0,
            columns_emitted: 0,
            rvs_running_max: 0.0,
        })
    }

    pub fn roi(&self) -> Roi {
        self.integrator.roi()
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    /// Uniform samples produced so far.
    pub fn uniform_len(&self) -> usize {
        self.uniform.len()
    }

    pub fn push_frame(&mut self, frame: &ThermalFrame) -> Result<Vec<EstimatorEvent>> {
        let corrected;
        let frame = if self.emissivity == 1.0 {
            frame
        } else {
            corrected = emissivity_correct(frame, self.emissivity)?;
            &corrected
        };
        let mut events = Vec::new();
        let Some((t, value)) = self.integrator.push(frame)? else {
            return Ok(events);
        };
        events.push(EstimatorEvent::Signal { t_s: t, value });

        let before = self.uniform.len();
        self.resampler.push(t, value, &mut self.uniform);
        if self.uniform.len() == before {
            return Ok(events);
        }

        loop {
            let end = self.rates_emitted * self.rate.hop_len() + self.rate.window_len();
            if end > self.uniform.len() {
                break;
            }
            let filtered = self.filtered_prefix(end)?;
            match self.rate.estimate_at(&filtered, end - self.rate.window_len()) {
                Ok(r) => events.push(EstimatorEvent::Rate(r)),
                Err(Error::FlatWindow { .. }) => {}
                Err(e) => return Err(e),
            }
            self.rates_emitted += 1;
        }

        loop {
            let start = self.columns_emitted * self.rvs.hop_len();
            let end = start + self.rvs.window_len();
            if end > self.uniform.len() {
                break;
            }
            let filtered = self.filtered_prefix(end)?;
            let raw = self.rvs.column(&filtered.values[start..end]);
            self.rvs_running_max = raw.iter().fold(self.rvs_running_max, |m, &v| m.max(v));
            let max = self.rvs_running_max;
            let normalized = raw
                .iter()
                .map(|&v| if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 })
                .collect();
            let t0 = self.resampler.t0().expect("uniform samples imply an origin");
            events.push(EstimatorEvent::RvsColumn(RvsColumn {
                t_s: self.rvs.column_time(t0, start),
                raw,
                normalized,
            }));
            self.columns_emitted += 1;
        }
        Ok(events)
    }

    fn filtered_prefix(&self, n: usize) -> Result<BreathingSignal> {
        let t0 = self.resampler.t0().expect("uniform samples imply an origin");
        let prefix = BreathingSignal::uniform(t0, self.params.fs, self.uniform[..n].to_vec())?;
        apply(&self.filter, &prefix)
    }
}
