//! Single-image decomposition `I = B + R` into a smooth background and a
//! sparse rain layer.

mod admm;
mod norms;
mod prox;

pub use admm::{admm_decompose, decompose_plane, BgPrior, DecompositionConfig, DecompositionResult, RainPrior};
pub use norms::{frobenius_sq, l1_norm, nuclear_norm, total_variation};
pub use prox::{soft_threshold, soft_threshold_plane, svt, TvProx};

use crate::framecore::FrameError;

#[derive(Debug, thiserror::Error)]
pub enum DecomposeError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("trace export failed: {0}")]
    Csv(#[from] csv::Error),
}
