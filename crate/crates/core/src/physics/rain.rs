//! Synthetic rain streaks.
//!
//! A streak is a straight segment whose covered pixels brighten by
//! `ΔI = alpha - beta * I_b`, where `I_b` is the occluded background. Streak
//! counts are Poisson per frame, and every frame draws from its own ChaCha
//! stream keyed by `(seed, frame_index)`, so frames render independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::PhysicsError;
use crate::framecore::{BinaryMask, Frame, SAMPLE_MAX};

/// Upper end of the admissible photometric slope for real rain.
pub const BETA_MAX: f64 = 0.039;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RainConfig {
    /// Poisson mean of the per-frame streak count.
    pub streaks_per_frame: f64,
    /// Mean streak direction in radians, measured from +x towards +y.
    pub orientation_mean: f64,
    /// Standard deviation of the streak direction in radians.
    pub orientation_jitter: f64,
    /// Streak length bounds in pixels.
    pub length_range: [f64; 2],
    /// Streak width in pixels.
    pub width: f64,
    pub beta: f64,
    pub alpha: f64,
    pub seed: u64,
    /// When non-zero, sequence generation drops any streak touching a pixel
    /// that was rained on in one of the previous `min_revisit_gap` frames.
    pub min_revisit_gap: usize,
}

impl Default for RainConfig {
    fn default() -> Self {
        Self {
            streaks_per_frame: 50.0,
            orientation_mean: 75f64.to_radians(),
            orientation_jitter: 3f64.to_radians(),
            length_range: [10.0, 24.0],
            width: 1.0,
            beta: 0.02,
            alpha: 30.0,
            seed: 0,
            min_revisit_gap: 0,
        }
    }
}

/// Brightness model of a streak pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photometry {
    pub beta: f64,
    pub alpha: f64,
}

impl Photometry {
    /// Accepts any slope that never darkens a pixel, including slopes outside
    /// the physical range.
    pub fn new(beta: f64, alpha: f64) -> Result<Self, PhysicsError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(PhysicsError::Config(format!("beta must be >= 0, got {beta}")));
        }
        if !(alpha.is_finite() && alpha >= beta * SAMPLE_MAX) {
            return Err(PhysicsError::Config(format!(
                "alpha must be >= beta * 255 = {}, got {alpha}",
                beta * SAMPLE_MAX
            )));
        }
        Ok(Self { beta, alpha })
    }

    #[inline]
    pub fn brighten(&self, background: f64) -> f64 {
        (background + self.alpha - self.beta * background).clamp(0.0, SAMPLE_MAX)
    }
}

impl RainConfig {
    pub fn validate(&self) -> Result<Photometry, PhysicsError> {
        let bad = |msg: String| Err(PhysicsError::Config(msg));
        if !(self.streaks_per_frame.is_finite() && self.streaks_per_frame >= 0.0) {
            return bad(format!("streaks_per_frame must be >= 0, got {}", self.streaks_per_frame));
        }
        if !(0.0..std::f64::consts::PI).contains(&self.orientation_mean) {
            return bad(format!("orientation_mean {} outside [0, pi)", self.orientation_mean));
        }
        if !(self.orientation_jitter.is_finite() && self.orientation_jitter >= 0.0) {
            return bad("orientation_jitter must be >= 0".into());
        }
        let [lo, hi] = self.length_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return bad(format!("invalid length_range [{lo}, {hi}]"));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return bad(format!("width must be > 0, got {}", self.width));
        }
        if self.beta > BETA_MAX {
            return bad(format!("beta {} outside [0, {BETA_MAX}]", self.beta));
        }
        Photometry::new(self.beta, self.alpha)
    }
}

/// One straight streak between two real-valued endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Streak {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub width: f64,
}

impl Streak {
    /// Linear indices of the pixels whose centres lie within `width / 2` of
    /// the segment.
    pub fn covered_pixels(&self, frame_width: usize, frame_height: usize) -> Vec<usize> {
        let half = self.width / 2.0;
        let (x0, y0) = self.start;
        let (x1, y1) = self.end;
        let xmin = (x0.min(x1) - half).floor().max(0.0) as usize;
        let ymin = (y0.min(y1) - half).floor().max(0.0) as usize;
        let xmax = (x0.max(x1) + half).ceil();
        let ymax = (y0.max(y1) + half).ceil();
        if xmax < 0.0 || ymax < 0.0 {
            return Vec::new();
        }
        let xmax = (xmax as usize).min(frame_width.saturating_sub(1));
        let ymax = (ymax as usize).min(frame_height.saturating_sub(1));
        let (dx, dy) = (x1 - x0, y1 - y0);
        let len2 = dx * dx + dy * dy;
        let mut out = Vec::new();
        for y in ymin..=ymax {
            for x in xmin..=xmax {
                let (px, py) = (x as f64, y as f64);
                let t = if len2 > 0.0 {
                    (((px - x0) * dx + (py - y0) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let (qx, qy) = (x0 + t * dx - px, y0 + t * dy - py);
                if qx * qx + qy * qy <= half * half + 1e-9 {
                    out.push(y * frame_width + x);
                }
            }
        }
        out
    }
}

/// The random generator for one frame.
fn frame_rng(seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_index);
    rng
}

/// Draws the streak geometry of one frame.
pub fn sample_streaks(cfg: &RainConfig, frame_index: u64, width: usize, height: usize) -> Vec<Streak> {
    let mut rng = frame_rng(cfg.seed, frame_index);
    let count = if cfg.streaks_per_frame > 0.0 {
        let p = Poisson::new(cfg.streaks_per_frame).expect("positive rate");
        let k: f64 = p.sample(&mut rng);
        k as usize
    } else {
        0
    };
    let [lo, hi] = cfg.length_range;
    (0..count)
        .map(|_| {
            let cx = rng.random::<f64>() * width as f64;
            let cy = rng.random::<f64>() * height as f64;
            let z: f64 = StandardNormal.sample(&mut rng);
            let theta = cfg.orientation_mean + cfg.orientation_jitter * z;
            let len = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let (hx, hy) = (0.5 * len * theta.cos(), 0.5 * len * theta.sin());
            Streak {
                start: (cx - hx, cy - hy),
                end: (cx + hx, cy + hy),
                width: cfg.width,
            }
        })
        .collect()
}

/// Rasterizes streaks onto `clean`.
///
/// Streaks touching a pixel set in `exclusion` are dropped whole. Pixels
/// covered by several streaks are brightened once.
pub fn paint_streaks(
    clean: &Frame,
    streaks: &[Streak],
    photometry: Photometry,
    exclusion: Option<&BinaryMask>,
) -> (Frame, BinaryMask) {
    let (w, h) = (clean.width(), clean.height());
    let mut mask = BinaryMask::new(w, h);
    for streak in streaks {
        let pixels = streak.covered_pixels(w, h);
        if let Some(ex) = exclusion {
            if pixels.iter().any(|&i| ex.get_index(i)) {
                continue;
            }
        }
        for i in pixels {
            mask.set_index(i, true);
        }
    }
    let ch = clean.channels();
    let mut samples = clean.samples().to_vec();
    for (i, px) in samples.chunks_exact_mut(ch).enumerate() {
        if mask.get_index(i) {
            for s in px {
                *s = photometry.brighten(*s);
            }
        }
    }
    (Frame::from_clamped(w, h, clean.mode(), samples), mask)
}

/// Renders one frame of rain over `clean`.
pub fn render_streaks(
    clean: &Frame,
    cfg: &RainConfig,
    frame_index: u64,
) -> Result<(Frame, BinaryMask), PhysicsError> {
    let photometry = cfg.validate()?;
    let streaks = sample_streaks(cfg, frame_index, clean.width(), clean.height());
    Ok(paint_streaks(clean, &streaks, photometry, None))
}
