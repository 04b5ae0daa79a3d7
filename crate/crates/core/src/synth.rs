//! Synthetic thermal sequences with known breathing phase.
//!
//! Nostril pixels follow `baseline + drift*t + amplitude*sin(phase(t)) + noise`
//! where `phase'(t) = 2*pi*rate(t)/60`; every other pixel is `ambient + noise`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codec::{decode_timestamp, encode_timestamp};
use crate::error::{Error, Result};
use crate::estimator::roi::Roi;
use crate::frame::{SequenceMeta, ThermalFrame, ThermalSequence, DEFAULT_EMISSIVITY};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateProfile {
    Constant { bpm: f64 },
    /// Linear sweep from `start_bpm` at t=0 to `end_bpm` at the end of the sequence.
    Chirp { start_bpm: f64, end_bpm: f64 },
}

impl RateProfile {
    pub fn bpm_at(&self, t: f64, duration: f64) -> f64 {
        match *self {
            RateProfile::Constant { bpm } => bpm,
            RateProfile::Chirp { start_bpm, end_bpm } => start_bpm + (end_bpm - start_bpm) * t / duration,
        }
    }

    /// Closed-form integral of `2*pi*rate/60` from 0 to `t`.
    pub fn phase_at(&self, t: f64, duration: f64) -> f64 {
        let breaths = match *self {
            RateProfile::Constant { bpm } => bpm * t,
            RateProfile::Chirp { start_bpm, end_bpm } => {
                start_bpm * t + (end_bpm - start_bpm) * t * t / (2.0 * duration)
            }
        };
        2.0 * PI * breaths / 60.0
    }

    fn extremes(&self) -> (f64, f64) {
        match *self {
            RateProfile::Constant { bpm } => (bpm, bpm),
            RateProfile::Chirp { start_bpm, end_bpm } => (start_bpm.min(end_bpm), start_bpm.max(end_bpm)),
        }
    }
}

impl std::fmt::Display for RateProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateProfile::Constant { bpm } => write!(f, "{bpm} bpm"),
            RateProfile::Chirp { start_bpm, end_bpm } => write!(f, "{start_bpm}->{end_bpm} bpm"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub width: u16,
    pub height: u16,
    /// Seconds.
    pub duration: f64,
    pub fps: f64,
    pub rate_profile: RateProfile,
    /// Peak thermal swing at the nostrils, kelvin.
    pub amplitude: f64,
    /// Skin temperature, kelvin.
    pub baseline: f64,
    /// Background temperature, kelvin.
    pub ambient: f64,
    /// Per-pixel Gaussian noise, kelvin.
    pub noise_sd: f64,
    /// Baseline drift, kelvin per minute.
    pub drift: f64,
    pub nostril_roi: Roi,
    /// Frame timestamp jitter, seconds.
    pub jitter_sd: f64,
    pub emissivity: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            duration: 60.0,
            fps: 9.0,
            rate_profile: RateProfile::Constant { bpm: 15.0 },
            amplitude: 0.3,
            baseline: 307.15,
            ambient: 296.15,
            noise_sd: 0.05,
            drift: 0.0,
            nostril_roi: Roi { x: 70, y: 72, w: 20, h: 8 },
            jitter_sd: 0.02,
            emissivity: DEFAULT_EMISSIVITY,
            seed: 0,
        }
    }
}

pub const MAX_FPS: f64 = 9.0;
pub const MAX_BPM: f64 = 60.0;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.fps > 0.0 && self.fps <= MAX_FPS) {
            return bad(format!("fps must lie in (0, {MAX_FPS}], got {}", self.fps));
        }
        let (lo, hi) = self.rate_profile.extremes();
        if !(lo > 0.0 && hi <= MAX_BPM) {
            return bad(format!("breathing rate must lie in (0, {MAX_BPM}] bpm, got {}", self.rate_profile));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad(format!("amplitude must be non-negative, got {}", self.amplitude));
        }
        if !(self.noise_sd >= 0.0 && self.jitter_sd >= 0.0) {
            return bad("noise and jitter must be non-negative".into());
        }
        if !(self.baseline.is_finite() && self.ambient.is_finite() && self.drift.is_finite()) {
            return bad("temperatures must be finite".into());
        }
        crate::frame::validate_emissivity(self.emissivity)?;
        self.nostril_roi.check_bounds(self.width, self.height)?;
        if self.frame_count() == 0 {
            return bad("duration x fps yields no frames".into());
        }
        Ok(())
    }

    /// `floor(duration * fps)`.
    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps + 1e-9).floor() as usize
    }
}

/// Exact phase and rate at every frame timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub times: Vec<f64>,
    pub phase_rad: Vec<f64>,
    pub rate_bpm: Vec<f64>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Generates a sequence and its ground truth. Equal configs give bit-identical output.
pub fn synthesize_sequence(cfg: &SynthConfig) -> Result<(ThermalSequence, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.frame_count();
    let (w, h) = (cfg.width as usize, cfg.height as usize);
    let period = 1.0 / cfg.fps;
    let max_jitter = 0.4 * period;
    let noise = |rng: &mut ChaCha8Rng, sd: f64| -> f64 {
        if sd == 0.0 {
            0.0
        } else {
            sd * rng.sample::<f64, _>(StandardNormal)
        }
    };

    let mut frames = Vec::with_capacity(n);
    let mut truth = GroundTruth {
        times: Vec::with_capacity(n),
        phase_rad: Vec::with_capacity(n),
        rate_bpm: Vec::with_capacity(n),
    };
    let roi = cfg.nostril_roi;
    for i in 0..n {
        let jitter = noise(&mut rng, cfg.jitter_sd).clamp(-max_jitter, max_jitter);
        let t = decode_timestamp(encode_timestamp((i as f64 * period + jitter).max(0.0)));
        let phase = cfg.rate_profile.phase_at(t, cfg.duration);
        let nostril = cfg.baseline + cfg.drift * t / 60.0 + cfg.amplitude * phase.sin();

        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..h as u32 {
            let inside_row = y >= roi.y && y < roi.y + roi.h;
            for x in 0..w as u32 {
                let base = if inside_row && x >= roi.x && x < roi.x + roi.w {
                    nostril
                } else {
                    cfg.ambient
                };
                pixels.push(base + noise(&mut rng, cfg.noise_sd));
            }
        }
        frames.push(ThermalFrame::new(t, cfg.width, cfg.height, pixels)?);
        truth.times.push(t);
        truth.phase_rad.push(phase);
        truth.rate_bpm.push(cfg.rate_profile.bpm_at(t, cfg.duration));
    }

    let meta = SequenceMeta {
        width: cfg.width,
        height: cfg.height,
        nominal_fps: cfg.fps as f32,
        emissivity: cfg.emissivity,
        frame_count: n as u32,
    };
    Ok((ThermalSequence::new(meta, frames)?, truth))
}
