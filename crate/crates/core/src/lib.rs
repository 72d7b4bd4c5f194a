//! Video rain removal algorithms and an evaluation harness that scores them
//! by their effect on downstream segmentation and feature tracking.

pub mod framecore;
pub mod harness;
pub mod metrics;
pub mod decompose;
pub mod derain;
pub mod physics;
pub mod segment;
pub mod track;

pub use framecore::{BinaryMask, ColorMode, Frame, FrameError, FrameSequence, Label, Plane, TriStateMask};
