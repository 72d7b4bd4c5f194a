//! Background subtraction with an adaptive per-pixel Gaussian mixture.

mod mog;

pub use mog::{mog_init, mog_update, segment_sequence, MogComponent, MogModel, MogParams, Segmentation};

use crate::framecore::FrameError;

#[derive(Debug, thiserror::Error)]
pub enum SegmentError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
