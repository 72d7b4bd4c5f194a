use super::{ColorMode, Frame, FrameError};

/// An ordered, non-empty list of identically shaped frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    fps: f64,
}

/// Frames `[center - radius, center + radius]` clipped to the sequence.
#[derive(Debug, Clone, Copy)]
pub struct TemporalWindow<'a> {
    pub frames: &'a [Frame],
    /// Sequence index of `frames[0]`.
    pub start: usize,
    pub left_clipped: bool,
    pub right_clipped: bool,
}

impl TemporalWindow<'_> {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.frames.len()
    }
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self, FrameError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(FrameError::InvalidFps(fps));
        }
        let first = frames.first().ok_or(FrameError::EmptySequence)?;
        for f in &frames[1..] {
            first.ensure_same_shape(f)?;
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; sequences hold at least one frame.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn mode(&self) -> ColorMode {
        self.frames[0].mode()
    }

    pub fn get(&self, n: usize) -> Option<&Frame> {
        self.frames.get(n)
    }

    /// Same frames with every frame passed through `f`.
    pub fn map_frames(&self, f: impl FnMut(&Frame) -> Frame) -> Result<Self, FrameError> {
        Self::new(self.frames.iter().map(f).collect(), self.fps)
    }

    pub fn to_luma(&self) -> Self {
        Self {
            frames: self.frames.iter().map(Frame::luma).collect(),
            fps: self.fps,
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            frames: self.frames.iter().rev().cloned().collect(),
            fps: self.fps,
        }
    }

    pub fn temporal_window(&self, n: usize, radius: usize) -> Result<TemporalWindow<'_>, FrameError> {
        let len = self.frames.len();
        if n >= len {
            return Err(FrameError::Index { index: n, len });
        }
        let start = n.saturating_sub(radius);
        let end = n.saturating_add(radius).min(len - 1);
        Ok(TemporalWindow {
            frames: &self.frames[start..=end],
            start,
            left_clipped: radius > n,
            right_clipped: n.saturating_add(radius) > len - 1,
        })
    }
}
