//! Video rain removal: spatial and temporal filters, and photometric streak
//! detection with temporal-mean inpainting.

mod blobs;
mod filters;
mod garg_nayar;
mod orientation;
mod photometric;

pub use blobs::{
    extract_blobs, passes_linearity, photometric_linearity_filter, StreakBlob, ELONGATION_CAP,
    MIN_BACKGROUND_SPREAD,
};
pub use filters::{spatial_filter, temporal_median, SpatialMode};
pub use garg_nayar::{frame_blobs, garg_nayar, GargNayarOutput, GargNayarParams};
pub use orientation::{axial_distance, dominant_orientation, orientation_consensus};
pub use photometric::{background_and_delta, chromatic_filter, inpaint_temporal_mean, photometric_candidates};

use crate::framecore::FrameError;

#[derive(Debug, thiserror::Error)]
pub enum DerainError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
