use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// One sample per usable frame, on the frame clock.
    Raw,
    /// Bandpassed, still on a uniform grid.
    Filtered,
    /// Linearly resampled onto a uniform grid.
    Uniform,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Filtered => "filtered",
            Stage::Uniform => "uniform",
        }
    }
}

/// A timestamped 1-D breathing trace in voxel units.
#[derive(Debug, Clone, PartialEq)]
pub struct BreathingSignal {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stage: Stage,
    /// Sample rate of a uniform or filtered signal.
    pub fs: Option<f64>,
}

impl BreathingSignal {
    pub fn raw(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_lengths(&times, &values)?;
        check_increasing(&times)?;
        Ok(Self {
            times,
            values,
            stage: Stage::Raw,
            fs: None,
        })
    }

    /// A uniform signal starting at `t0`; sample `k` sits at `t0 + k / fs`.
    pub fn uniform(t0: f64, fs: f64, values: Vec<f64>) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
        }
        let times = (0..values.len()).map(|k| grid_time(t0, fs, k)).collect();
        Ok(Self {
            times,
            values,
            stage: Stage::Uniform,
            fs: Some(fs),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample rate, or an error unless the signal sits on a uniform grid.
    pub fn require_uniform(&self) -> Result<f64> {
        match (self.stage, self.fs) {
            (Stage::Uniform | Stage::Filtered, Some(fs)) => Ok(fs),
            _ => Err(Error::WrongStage {
                expected: "uniform",
                got: self.stage.name(),
            }),
        }
    }

    /// Span covered by the samples, `len / fs` for uniform signals.
    pub fn duration(&self) -> f64 {
        match self.fs {
            Some(fs) => self.len() as f64 / fs,
            None => match (self.times.first(), self.times.last()) {
                (Some(a), Some(b)) => b - a,
                _ => 0.0,
            },
        }
    }

    /// The first `n` samples.
    pub fn prefix(&self, n: usize) -> Self {
        self.slice(0..n.min(self.len()))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            times: self.times[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
            stage: self.stage,
            fs: self.fs,
        }
    }
}

/// Time of grid sample `k`. Shared by batch and streaming paths so they agree bit-for-bit.
#[inline]
pub fn grid_time(t0: f64, fs: f64, k: usize) -> f64 {
    t0 + k as f64 / fs
}

fn check_lengths(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    Ok(())
}

fn check_increasing(times: &[f64]) -> Result<()> {
    if let Some(i) = times.windows(2).position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidParameter(format!(
            "sample times must be strictly increasing (index {})",
            i + 1
        )));
    }
    Ok(())
}

/// Number of samples in a span of `seconds` at `fs`.
pub(crate) fn samples_in(seconds: f64, fs: f64) -> usize {
    (seconds * fs).round() as usize
}
