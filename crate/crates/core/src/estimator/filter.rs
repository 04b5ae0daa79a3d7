//! Butterworth bandpass design and zero-phase application.
//!
//! The design follows the classic analog route: an order-`N` lowpass
//! prototype, a lowpass-to-bandpass transform around the prewarped band edges,
//! then the bilinear transform. The resulting `2N` poles are grouped into `N`
//! second-order sections, each with zeros at `z = 1` and `z = -1`.
//!
//! `low_hz`/`high_hz` are the -3 dB points of the response that is actually
//! applied. Forward-backward filtering squares the magnitude, so in zero-phase
//! mode the prototype bandwidth is widened until the squared response crosses
//! -3 dB at the requested edges.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimator::signal::{BreathingSignal, Stage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Prototype order per pass; the bandpass has `2 * order` poles.
    pub order: usize,
    /// Forward-backward application.
    pub zero_phase: bool,
}

impl Default for BandpassSpec {
    fn default() -> Self {
        Self {
            low_hz: 0.1,
            high_hz: 0.85,
            order: 2,
            zero_phase: true,
        }
    }
}

impl BandpassSpec {
    pub fn validate(&self, fs: f64) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParameter("filter order must be at least 1".into()));
        }
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz) {
            return Err(Error::InvalidParameter(format!(
                "band edges must satisfy 0 < low < high, got {}..{}",
                self.low_hz, self.high_hz
            )));
        }
        if self.high_hz.is_nan() || self.high_hz >= fs / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "high edge {} Hz must lie below Nyquist ({} Hz)",
                self.high_hz,
                fs / 2.0
            )));
        }
        Ok(())
    }

    /// Minimum number of samples the filter accepts.
    pub fn min_len(&self) -> usize {
        3 * self.order
    }
}

/// One biquad in direct form II transposed; `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2) / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Steady-state delay line for a unit step input.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }
}

/// A designed bandpass, ready to apply at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandpass {
    spec: BandpassSpec,
    fs: f64,
    sections: Vec<Section>,
}

impl Bandpass {
    pub fn design(spec: &BandpassSpec, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
        }
        spec.validate(fs)?;
        let n = spec.order;

        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w_lo, w_hi) = (warp(spec.low_hz), warp(spec.high_hz));
        let passes = if spec.zero_phase { 2.0 } else { 1.0 };
        let edge_gain = (2f64.powf(1.0 / passes) - 1.0).powf(1.0 / (2.0 * n as f64));
        let w0 = (w_lo * w_hi).sqrt();
        let bw = (w_hi - w_lo) / edge_gain;

        // Lowpass prototype poles on the unit circle, left half-plane.
        let proto = (0..n).map(|k| {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            Complex64::from_polar(1.0, theta)
        });

        // Lowpass -> bandpass, then bilinear.
        let fs2 = Complex64::new(2.0 * fs, 0.0);
        let mut poles = Vec::with_capacity(2 * n);
        for p in proto {
            let half = p * (bw / 2.0);
            let root = (half * half - w0 * w0).sqrt();
            for s in [half + root, half - root] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }

        let mut sections = pair_poles(poles)
            .into_iter()
            .map(|(p1, p2)| Section {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(p1 + p2).re, (p1 * p2).re],
            })
            .collect::<Vec<_>>();

        // Unity gain at the digital image of the analog centre frequency.
        let f_center = fs / PI * (w0 / (2.0 * fs)).atan();
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f_center / fs);
        let raw: f64 = sections.iter().map(|s| s.response(z_inv)).product::<Complex64>().norm();
        let per_section = raw.powf(-1.0 / sections.len() as f64);
        for s in &mut sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }

        Ok(Self {
            spec: *spec,
            fs,
            sections,
        })
    }

    pub fn spec(&self) -> &BandpassSpec {
        &self.spec
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// Complex response of a single pass at `f` Hz.
    pub fn single_pass_response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    /// Magnitude of the response as applied (squared in zero-phase mode).
    pub fn magnitude(&self, f: f64) -> f64 {
        let m = self.single_pass_response(f).norm();
        if self.spec.zero_phase {
            m * m
        } else {
            m
        }
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        20.0 * self.magnitude(f).log10()
    }

    /// Causal pass with the delay lines initialised to the steady state of `x[0]`.
    pub fn filter_causal(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        let x0 = x.first().copied().unwrap_or(0.0);
        self.run_sections(&mut y, x0);
        y
    }

    /// Forward-backward pass with odd-reflection padding at both ends.
    pub fn filter_zero_phase(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let first = ext[0];
        self.run_sections(&mut ext, first);
        ext.reverse();
        let first = ext[0];
        self.run_sections(&mut ext, first);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }

    fn run_sections(&self, y: &mut [f64], x0: f64) {
        let mut level = x0;
        for s in &self.sections {
            let [mut z1, mut z2] = s.step_state();
            z1 *= level;
            z2 *= level;
            for v in y.iter_mut() {
                let x = *v;
                let out = s.b[0] * x + z1;
                z1 = s.b[1] * x - s.a[1] * out + z2;
                z2 = s.b[2] * x - s.a[2] * out;
                *v = out;
            }
            level *= s.dc_gain();
        }
    }
}

/// Groups poles into conjugate pairs; leftover real poles are paired by magnitude.
fn pair_poles(mut poles: Vec<Complex64>) -> Vec<(Complex64, Complex64)> {
    const EPS: f64 = 1e-12;
    poles.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut pairs = Vec::with_capacity(poles.len() / 2);
    let mut reals = Vec::new();
    for p in &poles {
        if p.im > EPS {
            pairs.push((*p, p.conj()));
        } else if p.im.abs() <= EPS {
            reals.push(Complex64::new(p.re, 0.0));
        }
    }
    for chunk in reals.chunks(2) {
        match chunk {
            [a, b] => pairs.push((*a, *b)),
            [a] => pairs.push((*a, Complex64::new(0.0, 0.0))),
            _ => unreachable!(),
        }
    }
    pairs
}

/// Mean-removed bandpass of a uniform signal; output stage is `Filtered`.
pub fn bandpass(sig: &BreathingSignal, spec: &BandpassSpec) -> Result<BreathingSignal> {
    let fs = sig.require_uniform()?;
    let filter = Bandpass::design(spec, fs)?;
    apply(&filter, sig)
}

/// Applies an already designed filter to a uniform signal.
pub fn apply(filter: &Bandpass, sig: &BreathingSignal) -> Result<BreathingSignal> {
    let fs = sig.require_uniform()?;
    if (fs - filter.fs).abs() > 1e-12 * fs {
        return Err(Error::FsMismatch {
            expected: filter.fs,
            got: fs,
        });
    }
    let need = filter.spec.min_len();
    if sig.len() < need {
        return Err(Error::TooShort {
            have: sig.len(),
            need,
        });
    }
    let mean = sig.values.iter().sum::<f64>() / sig.len() as f64;
    let centered: Vec<f64> = sig.values.iter().map(|v| v - mean).collect();
    let values = if filter.spec.zero_phase {
        filter.filter_zero_phase(&centered)
    } else {
        filter.filter_causal(&centered)
    };
    Ok(BreathingSignal {
        times: sig.times.clone(),
        values,
        stage: Stage::Filtered,
        fs: Some(fs),
    })
}
