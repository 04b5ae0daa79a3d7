//! Tapered, zero-padded magnitude spectra shared by rate estimation and the RVS.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Symmetric Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![1.0],
        _ => (0..n)
            .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
            .collect(),
    }
}

/// FFT length: at least `min_len`, at least the window, and a power of two.
pub fn fft_len(window: usize, min_len: usize) -> usize {
    window.max(min_len).next_power_of_two()
}

/// Reusable plan for one window length and FFT length.
pub struct SpectrumPlan {
    taper: Vec<f64>,
    nfft: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectrumPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumPlan")
            .field("window", &self.taper.len())
            .field("nfft", &self.nfft)
            .finish()
    }
}

impl SpectrumPlan {
    pub fn new(window: usize, nfft: usize) -> Self {
        assert!(nfft >= window, "FFT shorter than window");
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        Self {
            taper: hann(window),
            nfft,
            fft,
        }
    }

    pub fn window(&self) -> usize {
        self.taper.len()
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    /// Frequency of bin `k` at sample rate `fs`.
    pub fn bin_hz(&self, k: usize, fs: f64) -> f64 {
        k as f64 * fs / self.nfft as f64
    }

    /// Bins `0..=nfft/2` whose centre lies in `[lo, hi]`.
    pub fn bins_in(&self, lo: f64, hi: f64, fs: f64) -> std::ops::Range<usize> {
        let first = (0..=self.nfft / 2).find(|&k| self.bin_hz(k, fs) >= lo);
        let Some(first) = first else { return 0..0 };
        let end = (first..=self.nfft / 2)
            .take_while(|&k| self.bin_hz(k, fs) <= hi)
            .last()
            .map_or(first, |k| k + 1);
        first..end
    }

    /// Magnitudes of bins `0..=nfft/2` of the mean-removed, tapered segment.
    pub fn magnitudes(&self, segment: &[f64]) -> Vec<f64> {
        assert_eq!(segment.len(), self.taper.len(), "segment length differs from plan");
        let mean = segment.iter().sum::<f64>() / segment.len() as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nfft];
        for ((slot, &x), &w) in buf.iter_mut().zip(segment).zip(&self.taper) {
            slot.re = (x - mean) * w;
        }
        self.fft.process(&mut buf);
        buf[..=self.nfft / 2].iter().map(|c| c.norm()).collect()
    }
}
