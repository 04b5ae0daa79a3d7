//! Respiration variability spectrogram.
//!
//! A short-time Fourier magnitude of the filtered breathing signal, cropped to
//! the breathing band and min-max normalised to `[0, 1]` so it can be treated
//! as a grayscale image. [`RvsStream`] builds the same columns incrementally.

mod image;

pub use self::image::{rvs_to_pgm, rvs_to_png, write_pgm, write_png};

use crate::error::{Error, Result};
use crate::estimator::signal::{grid_time, samples_in, BreathingSignal};
use crate::spectral::{fft_len, SpectrumPlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvsParams {
    pub win_s: f64,
    pub hop_s: f64,
    /// Minimum FFT length; rounded up to a power of two covering the window.
    pub pad_to: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    /// Use `20*log10(magnitude)` before normalising.
    pub log_magnitude: bool,
}

impl Default for RvsParams {
    fn default() -> Self {
        Self {
            win_s: 20.0,
            hop_s: 1.0,
            pad_to: 2048,
            f_lo: 0.05,
            f_hi: 1.0,
            log_magnitude: false,
        }
    }
}

impl RvsParams {
    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.win_s > 0.0 && self.hop_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "RVS window and hop must be positive, got {} s / {} s",
                self.win_s, self.hop_s
            )));
        }
        if samples_in(self.win_s, fs) < 2 || samples_in(self.hop_s, fs) == 0 {
            return Err(Error::InvalidParameter(format!(
                "RVS window {} s / hop {} s too short at {fs} Hz",
                self.win_s, self.hop_s
            )));
        }
        if !(self.f_lo >= 0.0 && self.f_lo < self.f_hi && self.f_hi <= fs / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "RVS band {}..{} Hz is invalid at {fs} Hz",
                self.f_lo, self.f_hi
            )));
        }
        Ok(())
    }
}

/// Window geometry, FFT plan and band crop for a given sample rate.
#[derive(Debug)]
pub struct RvsPlan {
    params: RvsParams,
    fs: f64,
    window: usize,
    hop: usize,
    plan: SpectrumPlan,
    band: std::ops::Range<usize>,
}

impl RvsPlan {
    pub fn new(params: RvsParams, fs: f64) -> Result<Self> {
        params.validate(fs)?;
        let window = samples_in(params.win_s, fs);
        let hop = samples_in(params.hop_s, fs);
        let plan = SpectrumPlan::new(window, fft_len(window, params.pad_to));
        let band = plan.bins_in(params.f_lo, params.f_hi, fs);
        if band.is_empty() {
            return Err(Error::InvalidParameter("RVS band contains no frequency bins".into()));
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

    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Centre frequency of every row, low to high.
    pub fn freqs(&self) -> Vec<f64> {
        self.band.clone().map(|k| self.plan.bin_hz(k, self.fs)).collect()
    }

    /// Cropped magnitudes of one window of samples.
    pub fn column(&self, segment: &[f64]) -> Vec<f64> {
        let mags = self.plan.magnitudes(segment);
        let cropped = &mags[self.band.clone()];
        if self.params.log_magnitude {
            cropped.iter().map(|m| 20.0 * m.max(1e-12).log10()).collect()
        } else {
            cropped.to_vec()
        }
    }

    /// Centre time of the window starting at sample `start`.
    pub fn column_time(&self, t0: f64, start: usize) -> f64 {
        grid_time(t0, self.fs, start) + self.window as f64 / (2.0 * self.fs)
    }
}

/// Un-normalised STFT magnitudes, one column per window placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    /// `columns[t][f]`, low to high frequency.
    pub columns: Vec<Vec<f64>>,
    pub params: RvsParams,
}

/// Normalised spectrogram; every magnitude lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rvs {
    pub freqs_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    /// `columns[t][f]`, low to high frequency.
    pub columns: Vec<Vec<f64>>,
    pub params: RvsParams,
}

impl Rvs {
    pub fn n_freqs(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn n_times(&self) -> usize {
        self.times_s.len()
    }

    pub fn get(&self, freq: usize, time: usize) -> f64 {
        self.columns[time][freq]
    }

    /// Row index of the largest magnitude in each column (lowest frequency on ties).
    pub fn ridge(&self) -> Vec<usize> {
        self.columns.iter().map(|c| argmax(c)).collect()
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// STFT magnitudes of a uniform signal before normalisation.
pub fn spectrogram(sig: &BreathingSignal, params: &RvsParams) -> Result<Spectrogram> {
    let fs = sig.require_uniform()?;
    let plan = RvsPlan::new(*params, fs)?;
    if sig.len() < plan.window {
        return Err(Error::TooShort {
            have: sig.len(),
            need: plan.window,
        });
    }
    let t0 = sig.times[0];
    let count = (sig.len() - plan.window) / plan.hop + 1;
    let mut times_s = Vec::with_capacity(count);
    let mut columns = Vec::with_capacity(count);
    for c in 0..count {
        let start = c * plan.hop;
        times_s.push(plan.column_time(t0, start));
        columns.push(plan.column(&sig.values[start..start + plan.window]));
    }
    Ok(Spectrogram {
        freqs_hz: plan.freqs(),
        times_s,
        columns,
        params: *params,
    })
}

/// Global min-max normalisation; a constant matrix maps to all zeros.
pub fn normalize(spec: Spectrogram) -> Rvs {
    let (lo, hi) = spec
        .columns
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let columns = spec
        .columns
        .into_iter()
        .map(|col| {
            col.into_iter()
                .map(|v| if range > 0.0 { ((v - lo) / range).clamp(0.0, 1.0) } else { 0.0 })
                .collect()
        })
        .collect();
    Rvs {
        freqs_hz: spec.freqs_hz,
        times_s: spec.times_s,
        columns,
        params: spec.params,
    }
}

pub fn compute_rvs(sig: &BreathingSignal, params: &RvsParams) -> Result<Rvs> {
    Ok(normalize(spectrogram(sig, params)?))
}

/// One column emitted by [`RvsStream`].
#[derive(Debug, Clone, PartialEq)]
pub struct RvsColumn {
    pub t_s: f64,
    /// Magnitudes before normalisation, low to high frequency.
    pub raw: Vec<f64>,
    /// `raw` divided by the running maximum over every column emitted so far.
    pub normalized: Vec<f64>,
}

/// Incremental spectrogram. Columns appear as soon as their window is complete
/// and match [`spectrogram`] on the same samples. Normalisation uses the
/// running maximum, so unlike [`compute_rvs`] no minimum is subtracted and
/// early columns are not rescaled when a later column is larger.
#[derive(Debug)]
pub struct RvsStream {
    plan: RvsPlan,
    t0: Option<f64>,
    /// Samples from absolute index `offset` onward.
    buffer: Vec<f64>,
    offset: usize,
    next_column: usize,
    running_max: f64,
}

impl RvsStream {
    pub fn new(params: RvsParams, fs: f64) -> Result<Self> {
        Ok(Self {
            plan: RvsPlan::new(params, fs)?,
            t0: None,
            buffer: Vec::new(),
            offset: 0,
            next_column: 0,
            running_max: 0.0,
        })
    }

    pub fn fs(&self) -> f64 {
        self.plan.fs
    }

    pub fn freqs_hz(&self) -> Vec<f64> {
        self.plan.freqs()
    }

    pub fn columns_emitted(&self) -> usize {
        self.next_column
    }

    pub fn reset(&mut self) {
        self.t0 = None;
        self.buffer.clear();
        self.offset = 0;
        self.next_column = 0;
        self.running_max = 0.0;
    }

    /// Appends the samples of a uniform chunk.
    pub fn push_window(&mut self, chunk: &BreathingSignal) -> Result<Vec<RvsColumn>> {
        let fs = chunk.require_uniform()?;
        if fs != self.plan.fs {
            return Err(Error::FsMismatch {
                expected: self.plan.fs,
                got: fs,
            });
        }
        if self.t0.is_none() {
            self.t0 = chunk.times.first().copied();
        }
        Ok(self.push_samples(&chunk.values))
    }

    /// Appends raw sample values; the first call must be preceded by [`Self::set_origin`]
    /// or a [`Self::push_window`].
    pub fn push_samples(&mut self, values: &[f64]) -> Vec<RvsColumn> {
        let t0 = self.t0.unwrap_or(0.0);
        self.buffer.extend_from_slice(values);
        let mut out = Vec::new();
        loop {
            let start = self.next_column * self.plan.hop;
            let end = start + self.plan.window;
            if end > self.offset + self.buffer.len() {
                break;
            }
            let seg = &self.buffer[start - self.offset..end - self.offset];
            let raw = self.plan.column(seg);
            self.running_max = raw.iter().fold(self.running_max, |m, &v| m.max(v));
            let normalized = raw
                .iter()
                .map(|&v| if self.running_max > 0.0 { (v / self.running_max).clamp(0.0, 1.0) } else { 0.0 })
                .collect();
            out.push(RvsColumn {
                t_s: self.plan.column_time(t0, start),
                raw,
                normalized,
            });
            self.next_column += 1;
        }
        let keep_from = self.next_column * self.plan.hop;
        if keep_from > self.offset {
            let drop = (keep_from - self.offset).min(self.buffer.len());
            self.buffer.drain(..drop);
            self.offset += drop;
        }
        out
    }

    /// Time of the first sample, for streams fed through [`Self::push_samples`].
    pub fn set_origin(&mut self, t0: f64) {
        self.t0 = Some(t0);
    }
}
