//! Radiometric frames and sequences.
//!
//! Pixels are absolute temperatures in kelvin. Dead or out-of-range pixels are
//! stored as [`INVALID`] (a NaN) and are skipped by every downstream stage.

use crate::error::{Error, Result};

/// Marker for a dead pixel.
pub const INVALID: f64 = f64::NAN;

/// Lowest representable valid temperature (-40 °C).
pub const MIN_VALID_K: f64 = 233.15;
/// Highest representable valid temperature (160 °C).
pub const MAX_VALID_K: f64 = 433.15;

pub const DEFAULT_WIDTH: u16 = 160;
pub const DEFAULT_HEIGHT: u16 = 120;
pub const DEFAULT_FPS: f32 = 9.0;
/// Emissivity of human skin.
pub const DEFAULT_EMISSIVITY: f64 = 0.98;

#[inline]
pub fn is_valid(t: f64) -> bool {
    (MIN_VALID_K..=MAX_VALID_K).contains(&t)
}

/// Maps anything outside the valid range (including NaN) to [`INVALID`].
#[inline]
pub fn sanitize(t: f64) -> f64 {
    if is_valid(t) {
        t
    } else {
        INVALID
    }
}

/// One timestamped radiometric image, row-major with a top-left origin.
#[derive(Debug, Clone)]
pub struct ThermalFrame {
    timestamp: f64,
    width: u16,
    height: u16,
    pixels: Vec<f64>,
}

impl ThermalFrame {
    /// Builds a frame, replacing out-of-range temperatures with [`INVALID`].
    pub fn new(timestamp: f64, width: u16, height: u16, mut pixels: Vec<f64>) -> Result<Self> {
        if !(timestamp.is_finite() && timestamp >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frame timestamp must be finite and non-negative, got {timestamp}"
            )));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "frame has {} pixels, expected {width}x{height} = {expected}",
                pixels.len()
            )));
        }
        for p in pixels.iter_mut() {
            *p = sanitize(*p);
        }
        Ok(Self {
            timestamp,
            width,
            height,
            pixels,
        })
    }

    /// A frame where every pixel has the same temperature.
    pub fn filled(timestamp: f64, width: u16, height: u16, value: f64) -> Result<Self> {
        Self::new(timestamp, width, height, vec![value; width as usize * height as usize])
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Applies `f` to every valid pixel; results outside the valid range become INVALID.
    pub fn map_valid(&self, f: impl Fn(f64) -> f64) -> Self {
        let pixels = self
            .pixels
            .iter()
            .map(|&p| if p.is_nan() { INVALID } else { sanitize(f(p)) })
            .collect();
        Self {
            timestamp: self.timestamp,
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

impl PartialEq for ThermalFrame {
    fn eq(&self, other: &Self) -> bool {
        self.timestamp == other.timestamp
            && self.width == other.width
            && self.height == other.height
            && self
                .pixels
                .iter()
                .zip(&other.pixels)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

/// Acquisition metadata shared by all frames of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMeta {
    pub width: u16,
    pub height: u16,
    /// Advisory; frame timestamps are authoritative.
    pub nominal_fps: f32,
    pub emissivity: f64,
    pub frame_count: u32,
}

impl Default for SequenceMeta {
    fn default() -> Self {
        Self {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            nominal_fps: DEFAULT_FPS,
            emissivity: DEFAULT_EMISSIVITY,
            frame_count: 0,
        }
    }
}

impl SequenceMeta {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "frame dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.nominal_fps.is_finite() && self.nominal_fps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nominal fps must be positive, got {}",
                self.nominal_fps
            )));
        }
        validate_emissivity(self.emissivity)
    }
}

pub(crate) fn validate_emissivity(e: f64) -> Result<()> {
    if e > 0.0 && e <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "emissivity must lie in (0, 1], got {e}"
        )))
    }
}

/// An ordered run of frames plus acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSequence {
    meta: SequenceMeta,
    frames: Vec<ThermalFrame>,
}

impl ThermalSequence {
    /// Checks dimensions and timestamp ordering; `meta.frame_count` is set from `frames`.
    pub fn new(mut meta: SequenceMeta, frames: Vec<ThermalFrame>) -> Result<Self> {
        meta.validate()?;
        if frames.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter("too many frames".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for (index, f) in frames.iter().enumerate() {
            if f.width != meta.width || f.height != meta.height {
                return Err(Error::FrameInvariant {
                    index,
                    reason: format!(
                        "dimensions {}x{} differ from sequence {}x{}",
                        f.width, f.height, meta.width, meta.height
                    ),
                });
            }
            if f.timestamp <= prev {
                return Err(Error::FrameInvariant {
                    index,
                    reason: format!(
                        "timestamp {} does not follow previous {}",
                        f.timestamp, prev
                    ),
                });
            }
            prev = f.timestamp;
        }
        meta.frame_count = frames.len() as u32;
        Ok(Self { meta, frames })
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    pub fn frames(&self) -> &[ThermalFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn into_frames(self) -> Vec<ThermalFrame> {
        self.frames
    }

    /// Applies a per-frame transform that preserves dimensions and timestamps.
    pub fn map_frames(&self, f: impl Fn(&ThermalFrame) -> ThermalFrame) -> Self {
        Self {
            meta: self.meta.clone(),
            frames: self.frames.iter().map(f).collect(),
        }
    }
}
