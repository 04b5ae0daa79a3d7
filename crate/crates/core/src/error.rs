use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which side of the frame a region of interest crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Right,
    Bottom,
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Edge::Right => f.write_str("right"),
            Edge::Bottom => f.write_str("bottom"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frame {index}: {reason}")]
    FrameInvariant { index: usize, reason: String },

    #[error("ROI crosses the {edge} edge: {extent} > {limit}")]
    RoiOutOfBounds { edge: Edge, extent: u64, limit: u64 },

    #[error("ROI {w}x{h} is degenerate (needs at least 4 pixels)")]
    RoiTooSmall { w: u32, h: u32 },

    #[error("unusable frame: {invalid} of {total} ROI pixels are invalid")]
    UnusableFrame { invalid: usize, total: usize },

    #[error("breathing signal has {usable} usable samples, need at least 2")]
    EmptySignal { usable: usize },

    #[error("signal too short: {have} samples, need {need}")]
    TooShort { have: usize, need: usize },

    #[error("expected a {expected} signal, got {got}")]
    WrongStage {
        expected: &'static str,
        got: &'static str,
    },

    #[error("window at t={t_center}s has no in-band power")]
    FlatWindow { t_center: f64 },

    #[error("sample rate mismatch: state expects {expected} Hz, got {got} Hz")]
    FsMismatch { expected: f64, got: f64 },

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` wrapper so [`Error`] can stay `PartialEq`.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl PartialEq for IoError {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}
