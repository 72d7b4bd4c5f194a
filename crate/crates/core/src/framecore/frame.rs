use serde::{Deserialize, Serialize};

use super::FrameError;

/// Largest representable sample value.
pub const SAMPLE_MAX: f64 = 255.0;

const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Pixel layout of a [`Frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    Luma,
    Rgb,
}

impl ColorMode {
    pub fn channels(self) -> usize {
        match self {
            ColorMode::Luma => 1,
            ColorMode::Rgb => 3,
        }
    }
}

/// A real-valued raster with samples in `[0, 255]`.
///
/// Samples are stored row-major and channel-interleaved, so the sample for
/// channel `c` of pixel `(x, y)` lives at `(y * width + x) * channels + c`.
/// The range invariant is checked on construction and every operation that
/// produces a `Frame` clamps its output.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    mode: ColorMode,
    samples: Vec<f64>,
}

impl Frame {
    pub fn new(
        width: usize,
        height: usize,
        mode: ColorMode,
        samples: Vec<f64>,
    ) -> Result<Self, FrameError> {
        let expected = width * height * mode.channels();
        if samples.len() != expected {
            return Err(FrameError::SampleCount {
                expected,
                found: samples.len(),
            });
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(0.0..=SAMPLE_MAX).contains(*s))
        {
            return Err(FrameError::SampleRange { index, value });
        }
        Ok(Self {
            width,
            height,
            mode,
            samples,
        })
    }

    pub fn filled(
        width: usize,
        height: usize,
        mode: ColorMode,
        value: f64,
    ) -> Result<Self, FrameError> {
        Self::new(
            width,
            height,
            mode,
            vec![value; width * height * mode.channels()],
        )
    }

    /// Builds a frame by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        mode: ColorMode,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, FrameError> {
        let ch = mode.channels();
        let mut samples = Vec::with_capacity(width * height * ch);
        for y in 0..height {
            for x in 0..width {
                for c in 0..ch {
                    samples.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, mode, samples)
    }

    /// Builds a frame from arbitrary finite values, clamping them into range.
    pub(crate) fn from_clamped(
        width: usize,
        height: usize,
        mode: ColorMode,
        mut samples: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(samples.len(), width * height * mode.channels());
        for s in &mut samples {
            debug_assert!(s.is_finite());
            *s = s.clamp(0.0, SAMPLE_MAX);
        }
        Self {
            width,
            height,
            mode,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn channels(&self) -> usize {
        self.mode.channels()
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.samples[(y * self.width + x) * self.mode.channels() + c]
    }

    /// All channel samples of one pixel, by linear pixel index.
    #[inline]
    pub fn pixel(&self, index: usize) -> &[f64] {
        let ch = self.mode.channels();
        &self.samples[index * ch..(index + 1) * ch]
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.mode == other.mode
    }

    pub(crate) fn ensure_same_shape(&self, other: &Frame) -> Result<(), FrameError> {
        if self.width != other.width || self.height != other.height {
            return Err(FrameError::Dimension {
                expected: (self.width, self.height),
                found: (other.width, other.height),
            });
        }
        if self.mode != other.mode {
            return Err(FrameError::Channels {
                expected: self.channels(),
                found: other.channels(),
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_mode(&self, mode: ColorMode) -> Result<(), FrameError> {
        if self.mode != mode {
            return Err(FrameError::Channels {
                expected: mode.channels(),
                found: self.channels(),
            });
        }
        Ok(())
    }

    /// Rec.601 luma of an RGB frame.
    pub fn to_luma(&self) -> Result<Frame, FrameError> {
        self.ensure_mode(ColorMode::Rgb)?;
        let samples = self
            .samples
            .chunks_exact(3)
            .map(|p| LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2])
            .collect();
        Ok(Frame::from_clamped(
            self.width,
            self.height,
            ColorMode::Luma,
            samples,
        ))
    }

    /// The luma view of this frame: a copy when already single channel.
    pub fn luma(&self) -> Frame {
        match self.mode {
            ColorMode::Luma => self.clone(),
            ColorMode::Rgb => self.to_luma().expect("rgb frame"),
        }
    }

    /// Copies a luma frame into all three channels of an RGB frame.
    pub fn replicate_rgb(&self) -> Result<Frame, FrameError> {
        self.ensure_mode(ColorMode::Luma)?;
        let samples = self.samples.iter().flat_map(|&s| [s, s, s]).collect();
        Ok(Frame {
            width: self.width,
            height: self.height,
            mode: ColorMode::Rgb,
            samples,
        })
    }

    /// Extracts one channel as an unconstrained real plane.
    pub fn channel_plane(&self, c: usize) -> Plane {
        let ch = self.channels();
        assert!(c < ch, "channel {c} out of range");
        Plane {
            width: self.width,
            height: self.height,
            data: self.samples.iter().skip(c).step_by(ch).copied().collect(),
        }
    }

    /// Builds a frame from per-channel planes, clamping into range.
    pub fn from_planes(planes: &[Plane]) -> Result<Frame, FrameError> {
        let mode = match planes.len() {
            1 => ColorMode::Luma,
            3 => ColorMode::Rgb,
            n => return Err(FrameError::Channels { expected: 3, found: n }),
        };
        let (w, h) = (planes[0].width, planes[0].height);
        for p in planes {
            if p.width != w || p.height != h {
                return Err(FrameError::Dimension {
                    expected: (w, h),
                    found: (p.width, p.height),
                });
            }
        }
        let mut samples = Vec::with_capacity(w * h * planes.len());
        for i in 0..w * h {
            for p in planes {
                let v = p.data[i];
                if !v.is_finite() {
                    return Err(FrameError::SampleRange { index: i, value: v });
                }
                samples.push(v);
            }
        }
        Ok(Frame::from_clamped(w, h, mode, samples))
    }

    /// Samples as `u8`, rounding half up and clamping.
    pub fn quantized(&self) -> Vec<u8> {
        self.samples.iter().map(|&s| quantize(s)).collect()
    }
}

#[inline]
pub fn quantize(s: f64) -> u8 {
    (s + 0.5).floor().clamp(0.0, SAMPLE_MAX) as u8
}

/// A single-channel real raster without range constraints.
///
/// Used for intermediate quantities (differences, gradients, decomposition
/// layers) that may leave `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self, FrameError> {
        if data.len() != width * height {
            return Err(FrameError::SampleCount {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        assert_eq!((self.width, self.height), (other.width, other.height));
        Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Plane {
        self.map(|v| v * k)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Converts to a luma frame, clamping into range.
    pub fn to_frame(&self) -> Result<Frame, FrameError> {
        Frame::from_planes(std::slice::from_ref(self))
    }
}

impl TryFrom<&Frame> for Plane {
    type Error = FrameError;

    /// Single-channel frames only.
    fn try_from(frame: &Frame) -> Result<Self, FrameError> {
        frame.ensure_mode(ColorMode::Luma)?;
        Ok(frame.channel_plane(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn luma_of_white_is_white() {
        let f = Frame::filled(2, 2, ColorMode::Rgb, 255.0).unwrap();
        let l = f.to_luma().unwrap();
        assert_eq!(l.channels(), 1);
        for &s in l.samples() {
            assert!((s - 255.0).abs() < 1e-9);
        }
    }

    #[test]
    fn luma_of_pure_red() {
        let f = Frame::new(1, 1, ColorMode::Rgb, vec![255.0, 0.0, 0.0]).unwrap();
        let l = f.to_luma().unwrap();
        assert!((l.get(0, 0, 0) - 76.245).abs() < 1e-9);
    }

    #[test]
    fn luma_rejects_single_channel() {
        let f = Frame::filled(3, 3, ColorMode::Luma, 10.0).unwrap();
        assert!(matches!(f.to_luma(), Err(FrameError::Channels { .. })));
    }

    #[test]
    fn construction_checks_length_and_range() {
        assert!(matches!(
            Frame::new(2, 2, ColorMode::Luma, vec![0.0; 3]),
            Err(FrameError::SampleCount { expected: 4, found: 3 })
        ));
        assert!(matches!(
            Frame::new(2, 1, ColorMode::Luma, vec![0.0, 255.5]),
            Err(FrameError::SampleRange { index: 1, .. })
        ));
        assert!(Frame::new(1, 1, ColorMode::Luma, vec![f64::NAN]).is_err());
    }

    #[test]
    fn quantize_rounds_half_up() {
        assert_eq!(quantize(2.5), 3);
        assert_eq!(quantize(2.49), 2);
        assert_eq!(quantize(254.6), 255);
        assert_eq!(quantize(0.0), 0);
    }

    #[test]
    fn planes_round_trip() {
        let f = Frame::from_fn(4, 3, ColorMode::Rgb, |x, y, c| (x * 10 + y * 3 + c) as f64).unwrap();
        let planes: Vec<Plane> = (0..3).map(|c| f.channel_plane(c)).collect();
        assert_eq!(Frame::from_planes(&planes).unwrap(), f);
    }

    proptest! {
        #[test]
        fn luma_idempotent_on_gray(values in prop::collection::vec(0.0f64..=255.0, 1..64)) {
            let n = values.len();
            let gray = Frame::new(n, 1, ColorMode::Luma, values).unwrap();
            let back = gray.replicate_rgb().unwrap().to_luma().unwrap();
            for (a, b) in gray.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
