//! Dataset ingestion, evaluation loops, report generation and the pieces of
//! the command-line tool.

mod config;
mod derainer;
mod eval;
mod manifest;
mod report;
mod synth;

pub use config::{DerainerSpec, EvalConfig, MetricToggles, SegmenterSpec, SynthConfig, SynthSequence};
pub use derainer::apply_derainer;
pub use eval::{run_restoration_eval, run_segmentation_eval, run_tracking_eval, BASELINE_LABEL};
pub use manifest::{DatasetManifest, SequenceData, SequenceEntry};
pub use report::{emit_report, format_percent, EvalReport, ReportFormat, ReportRow, RowScope};
pub use synth::generate_dataset;

use std::path::PathBuf;

use crate::decompose::DecomposeError;
use crate::derain::DerainError;
use crate::framecore::FrameError;
use crate::metrics::MetricsError;
use crate::physics::PhysicsError;
use crate::segment::SegmentError;
use crate::track::TrackError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("cannot parse {path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Derain(#[from] DerainError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// 1 for configuration problems, 2 for problems with the data.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Toml { .. } => 1,
            HarnessError::Derain(DerainError::Parameter(_))
            | HarnessError::Decompose(DecomposeError::Parameter(_))
            | HarnessError::Segment(SegmentError::Parameter(_))
            | HarnessError::Track(TrackError::Parameter(_))
            | HarnessError::Physics(PhysicsError::Config(_) | PhysicsError::Domain(_)) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
