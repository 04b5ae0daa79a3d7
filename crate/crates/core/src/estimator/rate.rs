//! Sliding-window breathing rate from the periodogram peak.

use crate::error::{Error, Result};
use crate::estimator::signal::{samples_in, BreathingSignal};
use crate::spectral::{fft_len, SpectrumPlan};

/// Minimum zero-padded periodogram length.
pub const MIN_FFT_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub t_center: f64,
    pub bpm: f64,
    /// Peak bin power over total in-band power.
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub window_s: f64,
    pub hop_s: f64,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            window_s: 30.0,
            hop_s: 1.0,
            low_hz: 0.1,
            high_hz: 0.85,
        }
    }
}

impl RateParams {
    fn validate(&self, fs: f64) -> Result<()> {
        if !(self.window_s > 0.0 && self.hop_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rate window and hop must be positive, got {} s / {} s",
                self.window_s, self.hop_s
            )));
        }
        if samples_in(self.hop_s, fs) == 0 {
            return Err(Error::InvalidParameter(format!(
                "hop {} s is shorter than one sample at {fs} Hz",
                self.hop_s
            )));
        }
        if !(self.low_hz >= 0.0 && self.low_hz < self.high_hz && self.high_hz <= fs / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "rate band {}..{} Hz is invalid at {fs} Hz",
                self.low_hz, self.high_hz
            )));
        }
        Ok(())
    }
}

/// Window geometry and FFT plan for one sample rate.
#[derive(Debug)]
pub struct RateEstimator {
    params: RateParams,
    fs: f64,
    window: usize,
    hop: usize,
    plan: SpectrumPlan,
    band: std::ops::Range<usize>,
}

impl RateEstimator {
    pub fn new(params: RateParams, fs: f64) -> Result<Self> {
        params.validate(fs)?;
        let window = samples_in(params.window_s, fs).max(2);
        let hop = samples_in(params.hop_s, fs);
        let plan = SpectrumPlan::new(window, fft_len(window, MIN_FFT_LEN));
        let band = plan.bins_in(params.low_hz, params.high_hz, fs);
        if band.is_empty() {
            return Err(Error::InvalidParameter("rate band contains no frequency bins".into()));
        }
        Ok(Self {
            params,
            fs,
            window,
            hop,
            plan,
            band,
        })
    }

    pub fn window_len(&self) -> usize {
        self.window
    }

    pub fn hop_len(&self) -> usize {
        self.hop
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.fs / self.plan.nfft() as f64
    }

    pub fn params(&self) -> &RateParams {
        &self.params
    }

    /// Number of complete windows in a signal of `n` samples.
    pub fn window_count(&self, n: usize) -> usize {
        if n < self.window {
            0
        } else {
            (n - self.window) / self.hop + 1
        }
    }

    /// Estimate for the window whose first sample is `start`.
    pub fn estimate_at(&self, sig: &BreathingSignal, start: usize) -> Result<RateEstimate> {
        let seg = &sig.values[start..start + self.window];
        let mags = self.plan.magnitudes(seg);
        let mut best = self.band.start;
        let mut best_power = -1.0;
        let mut total = 0.0;
        for k in self.band.clone() {
            let power = mags[k] * mags[k];
            total += power;
            // strict comparison keeps the lowest frequency on ties
            if power > best_power {
                best_power = power;
                best = k;
            }
        }
        let t_center = sig.times[start] + self.window as f64 / (2.0 * self.fs);
        if total.is_nan() || total <= 0.0 {
            return Err(Error::FlatWindow { t_center });
        }
        Ok(RateEstimate {
            t_center,
            bpm: 60.0 * self.plan.bin_hz(best, self.fs),
            confidence: best_power / total,
        })
    }

    pub fn estimate(&self, sig: &BreathingSignal) -> Result<Vec<RateEstimate>> {
        let fs = sig.require_uniform()?;
        if (fs - self.fs).abs() > 1e-12 * fs {
            return Err(Error::FsMismatch {
                expected: self.fs,
                got: fs,
            });
        }
        if sig.len() < self.window {
            return Err(Error::TooShort {
                have: sig.len(),
                need: self.window,
            });
        }
        (0..self.window_count(sig.len()))
            .map(|w| self.estimate_at(sig, w * self.hop))
            .collect()
    }
}

/// Rate estimates for every full window of a filtered uniform signal.
pub fn estimate_rate(sig: &BreathingSignal, params: &RateParams) -> Result<Vec<RateEstimate>> {
    let fs = sig.require_uniform()?;
    RateEstimator::new(*params, fs)?.estimate(sig)
}
