//! Thermal voxel integration.
//!
//! Each ROI pixel contributes a stack of unit-temperature voxels: the number
//! of whole quanta `delta` by which it exceeds a floor temperature. The sum of
//! those stacks over the ROI is one sample of the breathing signal; exhaled air
//! warms the nostril region and grows the stacks, inhaled air shrinks them.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::estimator::roi::Roi;
use crate::estimator::signal::BreathingSignal;
use crate::frame::{is_valid, ThermalFrame, ThermalSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FloorMode {
    /// Minimum valid ROI temperature over the trailing `window_s` seconds.
    WindowMin,
    /// A constant floor temperature in kelvin.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelParams {
    /// Kelvin per unit voxel.
    pub quantum: f64,
    pub floor_mode: FloorMode,
    pub window_s: f64,
}

impl Default for VoxelParams {
    fn default() -> Self {
        Self {
            quantum: 0.01,
            floor_mode: FloorMode::WindowMin,
            window_s: 30.0,
        }
    }
}

impl VoxelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantum.is_finite() && self.quantum > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "voxel quantum must be positive, got {}",
                self.quantum
            )));
        }
        if let FloorMode::Fixed(t) = self.floor_mode {
            if !is_valid(t) {
                return Err(Error::InvalidParameter(format!(
                    "fixed floor {t} K is outside the valid temperature range"
                )));
            }
        }
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "floor window must be positive, got {}",
                self.window_s
            )));
        }
        Ok(())
    }
}

/// Whole quanta in `excess / quantum`, tolerant of representation error at
/// exact multiples (0.03 / 0.01 is 2.9999999999999996 in binary).
#[inline]
fn whole_quanta(excess: f64, quantum: f64) -> u64 {
    if excess <= 0.0 {
        return 0;
    }
    let q = excess / quantum;
    let nearest = q.round();
    if (q - nearest).abs() <= 1e-6 {
        nearest as u64
    } else {
        q.floor() as u64
    }
}

/// Valid and total pixel counts and the minimum valid temperature inside the ROI.
fn roi_stats(frame: &ThermalFrame, roi: &Roi) -> (usize, usize, f64) {
    let px = frame.pixels();
    let mut valid = 0;
    let mut min = f64::INFINITY;
    for i in roi.indices(frame.width()) {
        let t = px[i];
        if !t.is_nan() {
            valid += 1;
            min = min.min(t);
        }
    }
    (valid, roi.area(), min)
}

fn check_usable(valid: usize, total: usize) -> Result<()> {
    let invalid = total - valid;
    if 2 * invalid > total {
        Err(Error::UnusableFrame { invalid, total })
    } else {
        Ok(())
    }
}

/// Voxel count of one frame: the sum over valid ROI pixels of
/// `floor(max(0, T - floor_k) / quantum)`.
pub fn voxel_integrate_frame(
    frame: &ThermalFrame,
    roi: &Roi,
    quantum: f64,
    floor_k: f64,
) -> Result<u64> {
    roi.check_bounds(frame.width(), frame.height())?;
    if !(quantum.is_finite() && quantum > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "voxel quantum must be positive, got {quantum}"
        )));
    }
    let (valid, total, _) = roi_stats(frame, roi);
    check_usable(valid, total)?;
    Ok(count_voxels(frame, roi, quantum, floor_k))
}

fn count_voxels(frame: &ThermalFrame, roi: &Roi, quantum: f64, floor_k: f64) -> u64 {
    let px = frame.pixels();
    roi.indices(frame.width())
        .map(|i| px[i])
        .filter(|t| !t.is_nan())
        .map(|t| whole_quanta(t - floor_k, quantum))
        .sum()
}

/// Frame-at-a-time integrator; the sliding floor is a monotone deque of
/// per-frame ROI minima.
#[derive(Debug, Clone)]
pub struct VoxelIntegrator {
    roi: Roi,
    params: VoxelParams,
    minima: VecDeque<(f64, f64)>,
}

impl VoxelIntegrator {
    pub fn new(roi: Roi, params: VoxelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            roi,
            params,
            minima: VecDeque::new(),
        })
    }

    pub fn roi(&self) -> Roi {
        self.roi
    }

    pub fn reset(&mut self) {
        self.minima.clear();
    }

    /// Returns `Ok(None)` for unusable frames; they leave a gap in the signal
    /// and do not enter the floor window.
    pub fn push(&mut self, frame: &ThermalFrame) -> Result<Option<(f64, f64)>> {
        self.roi.check_bounds(frame.width(), frame.height())?;
        let (valid, total, min) = roi_stats(frame, &self.roi);
        if check_usable(valid, total).is_err() {
            return Ok(None);
        }
        let t = frame.timestamp();
        let floor_k = match self.params.floor_mode {
            FloorMode::Fixed(t0) => t0,
            FloorMode::WindowMin => {
                while self.minima.back().is_some_and(|&(_, m)| m >= min) {
                    self.minima.pop_back();
                }
                self.minima.push_back((t, min));
                while self.minima.front().is_some_and(|&(ts, _)| ts < t - self.params.window_s) {
                    self.minima.pop_front();
                }
                self.minima.front().map(|&(_, m)| m).unwrap_or(min)
            }
        };
        let count = count_voxels(frame, &self.roi, self.params.quantum, floor_k);
        Ok(Some((t, count as f64)))
    }
}

/// Integrates every usable frame of `seq` into a raw breathing signal.
pub fn integrate_sequence(
    seq: &ThermalSequence,
    roi: &Roi,
    params: &VoxelParams,
) -> Result<BreathingSignal> {
    let meta = seq.meta();
    roi.check_bounds(meta.width, meta.height)?;
    let mut integrator = VoxelIntegrator::new(*roi, *params)?;
    let mut times = Vec::with_capacity(seq.len());
    let mut values = Vec::with_capacity(seq.len());
    for frame in seq.frames() {
        if let Some((t, v)) = integrator.push(frame)? {
            times.push(t);
            values.push(v);
        }
    }
    if times.len() < 2 {
        return Err(Error::EmptySignal { usable: times.len() });
    }
    BreathingSignal::raw(times, values)
}
