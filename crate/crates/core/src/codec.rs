//! The `.tseq` recorded-sequence format.
//!
//! All integers are little-endian.
//!
//! ```text
//! header (20 bytes)
//!   0  magic        b"TSEQ"
//!   4  version      u16 = 1
//!   6  width        u16
//!   8  height       u16
//!  10  frame_count  u32
//!  14  nominal_fps  f32
//!  18  emissivity   u16, x10^4 (0.98 -> 9800)
//! per frame
//!   timestamp_us    u64, microseconds since sequence start
//!   cells           width*height u16 centikelvin, row-major, 0 = invalid
//! ```

use std::path::Path;

use thiserror::Error;

use crate::frame::{SequenceMeta, ThermalFrame, ThermalSequence, INVALID};

pub const MAGIC: &[u8; 4] = b"TSEQ";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 20;

pub const CELL_INVALID: u16 = 0;
pub const CELL_MIN: u16 = 23315;
pub const CELL_MAX: u16 = 43315;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bad magic at offset {offset}")]
    BadMagic { offset: usize },

    #[error("unsupported version {version} at offset {offset}")]
    UnsupportedVersion { offset: usize, version: u16 },

    #[error("invalid {field} at offset {offset}: {reason}")]
    InvalidHeader {
        offset: usize,
        field: &'static str,
        reason: String,
    },

    #[error("truncated at offset {offset} (frame {frame:?}): need {needed} bytes, {available} available")]
    Truncated {
        offset: usize,
        frame: Option<u32>,
        needed: usize,
        available: usize,
    },

    #[error("cell value {value} out of range at offset {offset} (frame {frame}, pixel {pixel})")]
    OutOfRange {
        offset: usize,
        frame: u32,
        pixel: usize,
        value: u16,
    },

    #[error("timestamp {timestamp_us}us at offset {offset} (frame {frame}) does not follow {previous_us}us")]
    NonMonotoneTimestamp {
        offset: usize,
        frame: u32,
        previous_us: u64,
        timestamp_us: u64,
    },

    #[error("{extra} trailing bytes at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
}

impl DecodeError {
    pub fn offset(&self) -> usize {
        match *self {
            DecodeError::BadMagic { offset }
            | DecodeError::UnsupportedVersion { offset, .. }
            | DecodeError::InvalidHeader { offset, .. }
            | DecodeError::Truncated { offset, .. }
            | DecodeError::OutOfRange { offset, .. }
            | DecodeError::NonMonotoneTimestamp { offset, .. }
            | DecodeError::TrailingBytes { offset, .. } => offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("frame {frame}: {reason}")]
    Frame { frame: usize, reason: String },

    #[error("emissivity {0} is not representable (needs 1..=10000 after x10^4)")]
    Emissivity(f64),
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Temperature to centikelvin cell, rounding half-up. NaN maps to [`CELL_INVALID`].
#[inline]
pub fn encode_cell(t: f64) -> u16 {
    if t.is_nan() {
        return CELL_INVALID;
    }
    let c = (t * 100.0 + 0.5).floor();
    if (CELL_MIN as f64..=CELL_MAX as f64).contains(&c) {
        c as u16
    } else {
        CELL_INVALID
    }
}

/// Centikelvin cell to temperature. Callers must reject out-of-range cells first.
#[inline]
pub fn decode_cell(c: u16) -> f64 {
    if c == CELL_INVALID {
        INVALID
    } else {
        c as f64 / 100.0
    }
}

#[inline]
fn cell_in_range(c: u16) -> bool {
    c == CELL_INVALID || (CELL_MIN..=CELL_MAX).contains(&c)
}

/// Seconds to whole microseconds, rounding half-up.
#[inline]
pub fn encode_timestamp(t: f64) -> u64 {
    (t * 1e6 + 0.5).floor() as u64
}

#[inline]
pub fn decode_timestamp(us: u64) -> f64 {
    us as f64 / 1e6
}

/// Appends the width*height cells of `frame` to `out`.
pub fn encode_cells(frame: &ThermalFrame, out: &mut Vec<u8>) {
    out.reserve(frame.pixels().len() * 2);
    for &p in frame.pixels() {
        out.extend_from_slice(&encode_cell(p).to_le_bytes());
    }
}

pub fn encode_sequence(seq: &ThermalSequence) -> Result<Vec<u8>, EncodeError> {
    let meta = seq.meta();
    let emissivity = (meta.emissivity * 1e4).round();
    if !(1.0..=10_000.0).contains(&emissivity) {
        return Err(EncodeError::Emissivity(meta.emissivity));
    }
    let cells = meta.width as usize * meta.height as usize;
    let mut out = Vec::with_capacity(HEADER_LEN + seq.len() * (8 + 2 * cells));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&meta.width.to_le_bytes());
    out.extend_from_slice(&meta.height.to_le_bytes());
    out.extend_from_slice(&(seq.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta.nominal_fps.to_le_bytes());
    out.extend_from_slice(&(emissivity as u16).to_le_bytes());

    let mut previous: Option<u64> = None;
    for (i, frame) in seq.frames().iter().enumerate() {
        if frame.width() != meta.width || frame.height() != meta.height {
            return Err(EncodeError::Frame {
                frame: i,
                reason: "dimension mismatch".into(),
            });
        }
        if frame.timestamp() * 1e6 >= u64::MAX as f64 {
            return Err(EncodeError::Frame {
                frame: i,
                reason: "timestamp overflows u64 microseconds".into(),
            });
        }
        let us = encode_timestamp(frame.timestamp());
        if previous.is_some_and(|p| us <= p) {
            return Err(EncodeError::Frame {
                frame: i,
                reason: format!("timestamp {us}us is not after the previous frame at microsecond resolution"),
            });
        }
        previous = Some(us);
        out.extend_from_slice(&us.to_le_bytes());
        encode_cells(frame, &mut out);
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, frame: Option<u32>) -> Result<&'a [u8], DecodeError> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return Err(DecodeError::Truncated {
                offset: self.pos,
                frame,
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(self.take(2, None)?.try_into().unwrap()))
    }
}

pub fn decode_sequence(bytes: &[u8]) -> Result<ThermalSequence, DecodeError> {
    let magic_len = bytes.len().min(4);
    if bytes[..magic_len] != MAGIC[..magic_len] {
        return Err(DecodeError::BadMagic { offset: 0 });
    }
    let mut r = Reader { bytes, pos: 0 };
    r.take(4, None)?;

    let version = r.u16()?;
    if version != VERSION {
        return Err(DecodeError::UnsupportedVersion { offset: 4, version });
    }
    let width = r.u16()?;
    let height = r.u16()?;
    if width == 0 || height == 0 {
        return Err(DecodeError::InvalidHeader {
            offset: if width == 0 { 6 } else { 8 },
            field: "dimensions",
            reason: format!("{width}x{height} has no pixels"),
        });
    }
    let frame_count = u32::from_le_bytes(r.take(4, None)?.try_into().unwrap());
    let fps = f32::from_le_bytes(r.take(4, None)?.try_into().unwrap());
    if !(fps.is_finite() && fps > 0.0) {
        return Err(DecodeError::InvalidHeader {
            offset: 14,
            field: "nominal_fps",
            reason: format!("{fps} is not a positive finite rate"),
        });
    }
    let emissivity = r.u16()?;
    if !(1..=10_000).contains(&emissivity) {
        return Err(DecodeError::InvalidHeader {
            offset: 18,
            field: "emissivity",
            reason: format!("{emissivity} is outside 1..=10000"),
        });
    }

    let cells = width as usize * height as usize;
    let frame_len = 8 + 2 * cells;
    let remaining = bytes.len() - r.pos;
    let mut frames = Vec::with_capacity((frame_count as usize).min(remaining / frame_len));
    let mut previous: Option<u64> = None;
    for frame in 0..frame_count {
        let frame_offset = r.pos;
        let chunk = r.take(frame_len, Some(frame))?;
        let us = u64::from_le_bytes(chunk[..8].try_into().unwrap());
        if let Some(p) = previous.filter(|&p| us <= p) {
            return Err(DecodeError::NonMonotoneTimestamp {
                offset: frame_offset,
                frame,
                previous_us: p,
                timestamp_us: us,
            });
        }
        previous = Some(us);
        let mut pixels = Vec::with_capacity(cells);
        for (pixel, c) in chunk[8..].chunks_exact(2).enumerate() {
            let value = u16::from_le_bytes([c[0], c[1]]);
            if !cell_in_range(value) {
                return Err(DecodeError::OutOfRange {
                    offset: frame_offset + 8 + 2 * pixel,
                    frame,
                    pixel,
                    value,
                });
            }
            pixels.push(decode_cell(value));
        }
        let frame = ThermalFrame::new(decode_timestamp(us), width, height, pixels)
            .expect("decoded frame satisfies frame invariants");
        frames.push(frame);
    }
    if r.pos != bytes.len() {
        return Err(DecodeError::TrailingBytes {
            offset: r.pos,
            extra: bytes.len() - r.pos,
        });
    }

    let meta = SequenceMeta {
        width,
        height,
        nominal_fps: fps,
        emissivity: emissivity as f64 / 1e4,
        frame_count,
    };
    Ok(ThermalSequence::new(meta, frames).expect("decoded sequence satisfies sequence invariants"))
}

pub fn write_sequence(path: impl AsRef<Path>, seq: &ThermalSequence) -> Result<(), FileError> {
    let bytes = encode_sequence(seq)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<ThermalSequence, FileError> {
    let bytes = std::fs::read(path)?;
    Ok(decode_sequence(&bytes)?)
}
