//! Precipitation extinction, haze composition, and the synthetic rain renderer
//! used as ground truth by the deraining tests.

mod extinction;
mod rain;
mod synth;

pub use extinction::{
    attenuate, rain_extinction, snow_extinction, ExtinctionModel, Precipitation, SNOW_TO_RAIN_RATIO,
};
pub use rain::{paint_streaks, render_streaks, sample_streaks, Photometry, RainConfig, Streak, BETA_MAX};
pub use synth::{add_sensor_noise, cluttered_background, generate_synthetic_sequence, textured_background, MovingRect, SyntheticSequence};

use crate::framecore::FrameError;

#[derive(Debug, thiserror::Error)]
pub enum PhysicsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
