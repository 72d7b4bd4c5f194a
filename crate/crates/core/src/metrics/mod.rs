//! Scoring: confusion counts with don't-care exclusion, F-measure, PSNR,
//! SSIM and baseline-relative improvement.

mod confusion;
mod quality;

pub use confusion::{confusion, f_measure, ConfusionCounts};
pub use quality::{mse, psnr, psnr_from_mse, ssim, ssim_with, SsimParams};

use crate::framecore::FrameError;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Percentage change of `treated` over `baseline`; `None` for a zero or
/// non-finite baseline.
pub fn relative_improvement(baseline: f64, treated: f64) -> Option<f64> {
    if baseline == 0.0 || !baseline.is_finite() || !treated.is_finite() {
        return None;
    }
    Some(100.0 * (treated - baseline) / baseline)
}
