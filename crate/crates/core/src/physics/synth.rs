use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rain::{paint_streaks, sample_streaks, RainConfig};
use super::PhysicsError;
use crate::framecore::{BinaryMask, ColorMode, Frame, FrameSequence, Label, TriStateMask};

/// A smooth but strongly textured static scene with samples in `[40, 180]`.
///
/// Two interfering sinusoid layers with seeded phases and a mild ramp; every
/// region has gradients in both directions, so corners exist everywhere and
/// rain streaks always sit on a varying background.
pub fn textured_background(width: usize, height: usize, mode: ColorMode, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() * std::f64::consts::TAU);
    let theta = rng.random::<f64>() * std::f64::consts::PI;
    let (w, h) = (width.max(1) as f64, height.max(1) as f64);
    Frame::from_fn(width, height, mode, |x, y, c| {
        let (x, y) = (x as f64, y as f64);
        let along = x * theta.cos() + y * theta.sin();
        110.0
            + 35.0 * (x / 5.0 + phase[0]).sin() * (y / 6.0 + phase[1]).sin()
            + 22.0 * (along / 8.0 + phase[2]).sin()
            + 10.0 * (x / w + y / h - 1.0)
            + 3.0 * (c as f64 + phase[3]).sin()
    })
    .expect("samples stay in range")
}

/// `textured_background` overlaid with `blocks` static rectangles of flat
/// offset in `[-45, 45]`, 3 to 12 px on a side. Their corners give the
/// scene the dense trackable structure of a built-up street.
pub fn cluttered_background(width: usize, height: usize, mode: ColorMode, seed: u64, blocks: usize) -> Frame {
    let base = textured_background(width, height, mode, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let ch = mode.channels();
    let mut samples = base.into_samples();
    for _ in 0..blocks {
        let (bw, bh) = (rng.random_range(3..=12usize), rng.random_range(3..=12usize));
        if bw > width || bh > height {
            continue;
        }
        let (x0, y0) = (rng.random_range(0..=width - bw), rng.random_range(0..=height - bh));
        let offset = rng.random_range(-45.0..45.0);
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                for c in 0..ch {
                    samples[(y * width + x) * ch + c] += offset;
                }
            }
        }
    }
    Frame::from_clamped(width, height, mode, samples)
}

/// Adds zero-mean Gaussian sensor noise of standard deviation `sigma` to
/// every sample, clamping to range. Frame `t` draws from its own stream.
pub fn add_sensor_noise(seq: &FrameSequence, sigma: f64, seed: u64) -> Result<FrameSequence, PhysicsError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(PhysicsError::Config(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(seq.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    let frames = seq
        .frames()
        .iter()
        .enumerate()
        .map(|(t, f)| {
            // keyed apart from the rain streams, which share the seed
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
            rng.set_stream(t as u64);
            let samples = f.samples().iter().map(|s| s + normal.sample(&mut rng)).collect();
            Frame::from_clamped(f.width(), f.height(), f.mode(), samples)
        })
        .collect();
    Ok(FrameSequence::new(frames, seq.fps())?)
}

/// An axis-aligned rectangle moving at constant velocity.
///
/// Its pixels are the background plus `offset`, clamped to range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingRect {
    /// Top-left corner at frame 0.
    pub x: f64,
    pub y: f64,
    pub width: usize,
    pub height: usize,
    /// Displacement per frame in pixels.
    pub vx: f64,
    pub vy: f64,
    pub offset: f64,
}

impl MovingRect {
    /// Integer top-left corner at frame `t`.
    pub fn corner_at(&self, t: usize) -> (i64, i64) {
        (
            (self.x + self.vx * t as f64).round() as i64,
            (self.y + self.vy * t as f64).round() as i64,
        )
    }

    fn check_bounds(&self, n_frames: usize, w: usize, h: usize) -> Result<(), PhysicsError> {
        for t in 0..n_frames {
            let (x, y) = self.corner_at(t);
            if x < 0 || y < 0 || x as usize + self.width > w || y as usize + self.height > h {
                return Err(PhysicsError::Config(format!(
                    "rectangle leaves the {w}x{h} frame at frame {t} (corner {x}, {y})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub clean: FrameSequence,
    pub rainy: FrameSequence,
    /// Pixels brightened by rain in each frame.
    pub streak_masks: Vec<BinaryMask>,
    /// Rectangle pixels as foreground, everything else background.
    pub fg_masks: Vec<TriStateMask>,
}

/// Renders a static background with an optional moving rectangle, then rains
/// on every frame.
pub fn generate_synthetic_sequence(
    background: &Frame,
    object: Option<&MovingRect>,
    rain: &RainConfig,
    n_frames: usize,
    fps: f64,
) -> Result<SyntheticSequence, PhysicsError> {
    let photometry = rain.validate()?;
    if n_frames == 0 {
        return Err(PhysicsError::Config("n_frames must be >= 1".into()));
    }
    let (w, h) = (background.width(), background.height());
    if let Some(rect) = object {
        rect.check_bounds(n_frames, w, h)?;
    }
    let ch = background.channels();

    let mut clean = Vec::with_capacity(n_frames);
    let mut rainy = Vec::with_capacity(n_frames);
    let mut streak_masks: Vec<BinaryMask> = Vec::with_capacity(n_frames);
    let mut fg_masks = Vec::with_capacity(n_frames);

    for t in 0..n_frames {
        let mut fg = TriStateMask::filled(w, h, Label::Background);
        let frame = match object {
            None => background.clone(),
            Some(rect) => {
                let (x0, y0) = rect.corner_at(t);
                let (x0, y0) = (x0 as usize, y0 as usize);
                let mut samples = background.samples().to_vec();
                for y in y0..y0 + rect.height {
                    for x in x0..x0 + rect.width {
                        fg.set(x, y, Label::Foreground);
                        for c in 0..ch {
                            samples[(y * w + x) * ch + c] += rect.offset;
                        }
                    }
                }
                Frame::from_clamped(w, h, background.mode(), samples)
            }
        };

        let exclusion = (rain.min_revisit_gap > 0 && t > 0).then(|| {
            let mut ex = BinaryMask::new(w, h);
            for m in streak_masks.iter().rev().take(rain.min_revisit_gap) {
                ex.union_with(m);
            }
            ex
        });
        let streaks = sample_streaks(rain, t as u64, w, h);
        let (wet, mask) = paint_streaks(&frame, &streaks, photometry, exclusion.as_ref());

        clean.push(frame);
        rainy.push(wet);
        streak_masks.push(mask);
        fg_masks.push(fg);
    }

    Ok(SyntheticSequence {
        clean: FrameSequence::new(clean, fps)?,
        rainy: FrameSequence::new(rainy, fps)?,
        streak_masks,
        fg_masks,
    })
}
