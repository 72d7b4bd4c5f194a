//! Corner detection, pyramidal Lucas-Kanade tracking and the
//! forward-backward tracking accuracy protocol.

mod eval;
mod features;
mod lk;

pub use eval::{forward_backward_eval, write_tracking_csv, RoundReport, TrackParams, TrackRecord, TrackStatus, TrackingReport};
pub use features::{min_eig_response, select_features, FeatureParams, FeaturePoint};
pub use lk::{lk_track, LkParams, Pyramid};

use crate::framecore::FrameError;

#[derive(Debug, thiserror::Error)]
pub enum TrackError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
}
