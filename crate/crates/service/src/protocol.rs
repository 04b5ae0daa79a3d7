//! Replay wire protocol: JSON text messages plus one binary frame layout.

use serde::{Deserialize, Serialize};
use thermsense_core::codec::encode_cells;
use thermsense_core::ThermalFrame;
use thiserror::Error;

/// Bytes before the cells of a binary frame message.
pub const FRAME_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    SetRoi { x: i64, y: i64, w: i64, h: i64 },
    Play,
    Pause,
    Seek { t_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Frame,
    Signal,
    Rate,
    Rvs,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Frame, Channel::Signal, Channel::Rate, Channel::Rvs];
}

/// Every server message except frames, which travel as binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Signal {
        seq: u64,
        t_s: f64,
        value: f64,
    },
    Rate {
        seq: u64,
        t_center_s: f64,
        bpm: f64,
        confidence: f64,
    },
    RvsCol {
        seq: u64,
        t_s: f64,
        f_lo_hz: f64,
        f_hi_hz: f64,
        /// Low to high frequency, divided by the running maximum.
        mags: Vec<f64>,
    },
    RoiAck {
        seq: u64,
        t_s: f64,
        x: u32,
        y: u32,
        w: u32,
        h: u32,
    },
    Error {
        code: String,
        detail: String,
    },
    /// Last message of `channel` for the current pass; `seq` continues that channel's numbering.
    End {
        channel: Channel,
        seq: u64,
        t_s: f64,
    },
}

impl ServerMessage {
    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialise")
    }
}

/// Error codes sent to clients.
pub mod codes {
    pub const MALFORMED_MESSAGE: &str = "malformed_message";
    pub const ROI_OUT_OF_BOUNDS: &str = "roi_out_of_bounds";
    pub const INVALID_ROI: &str = "invalid_roi";
    pub const INVALID_SEEK: &str = "invalid_seek";
    pub const ESTIMATOR_FAILED: &str = "estimator_failed";
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMessage {
    pub seq: u32,
    pub timestamp_us: u64,
    pub width: u16,
    pub height: u16,
    /// Centikelvin, row-major; 0 marks an invalid pixel.
    pub cells: Vec<u16>,
}

#[derive(Debug, Error, PartialEq)]
pub enum FrameDecodeError {
    #[error("frame message is {0} bytes, shorter than its header")]
    ShortHeader(usize),
    #[error("frame message has {got} cell bytes, {width}x{height} needs {need}")]
    CellCount { width: u16, height: u16, need: usize, got: usize },
}

pub fn encode_frame(seq: u32, timestamp_us: u64, frame: &ThermalFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + frame.pixels().len() * 2);
    out.extend_from_slice(&seq.to_le_bytes());
    out.extend_from_slice(&timestamp_us.to_le_bytes());
    out.extend_from_slice(&frame.width().to_le_bytes());
    out.extend_from_slice(&frame.height().to_le_bytes());
    encode_cells(frame, &mut out);
    out
}

pub fn decode_frame(bytes: &[u8]) -> Result<FrameMessage, FrameDecodeError> {
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(FrameDecodeError::ShortHeader(bytes.len()));
    }
    let seq = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let timestamp_us = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let width = u16::from_le_bytes(bytes[12..14].try_into().unwrap());
    let height = u16::from_le_bytes(bytes[14..16].try_into().unwrap());
    let body = &bytes[FRAME_HEADER_LEN..];
    let need = width as usize * height as usize * 2;
    if body.len() != need {
        return Err(FrameDecodeError::CellCount {
            width,
            height,
            need,
            got: body.len(),
        });
    }
    let cells = body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
    Ok(FrameMessage {
        seq,
        timestamp_us,
        width,
        height,
        cells,
    })
}
