//! Frames, sequences, masks and their PNG encodings.

mod frame;
pub mod io;
mod mask;
mod sequence;

use std::path::PathBuf;

pub use frame::{quantize, ColorMode, Frame, Plane, SAMPLE_MAX};
pub use mask::{BinaryMask, Label, TriStateMask};
pub use sequence::{FrameSequence, TemporalWindow};

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("expected {expected} samples, found {found}")]
    SampleCount { expected: usize, found: usize },
    #[error("sample {index} has value {value}, outside [0, 255]")]
    SampleRange { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    Dimension {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("expected {expected} channel(s), found {found}")]
    Channels { expected: usize, found: usize },
    #[error("frame index {index} out of range for a sequence of {len}")]
    Index { index: usize, len: usize },
    #[error("sequence has no frames")]
    EmptySequence,
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("{}: unknown mask value {value} at pixel ({x}, {y})", path.display())]
    MaskValue {
        path: PathBuf,
        value: u8,
        x: usize,
        y: usize,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
