use serde::{Deserialize, Serialize};

use super::TrackError;
use crate::framecore::{ColorMode, Frame, Plane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePoint {
    pub x: f64,
    pub y: f64,
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    pub max_n: usize,
    /// Fraction of the strongest response below which points are ignored.
    pub quality: f64,
    pub min_dist: f64,
    /// Side of the box over which the structure tensor is summed.
    pub window: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            max_n: 200,
            quality: 0.01,
            min_dist: 8.0,
            window: 3,
        }
    }
}

impl FeatureParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        if self.max_n == 0 {
            return Err(TrackError::Parameter("max_n must be >= 1".into()));
        }
        if self.window % 2 == 0 {
            return Err(TrackError::Parameter("structure window must be odd".into()));
        }
        if !(self.quality >= 0.0 && self.min_dist >= 0.0) {
            return Err(TrackError::Parameter("quality and min_dist must be >= 0".into()));
        }
        Ok(())
    }
}

/// Smaller eigenvalue of the box-summed Sobel structure tensor. Pixels whose
/// support would leave the frame score 0.
pub fn min_eig_response(frame: &Frame, window: usize) -> Result<Plane, TrackError> {
    frame.ensure_mode(ColorMode::Luma)?;
    let (w, h) = (frame.width(), frame.height());
    let r = window / 2;
    let border = r + 1;
    let at = |x: usize, y: usize| frame.get(x, y, 0);
    let mut gxx = Plane::zeros(w, h);
    let mut gyy = Plane::zeros(w, h);
    let mut gxy = Plane::zeros(w, h);
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1);
            let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1);
            gxx.set(x, y, gx * gx);
            gyy.set(x, y, gy * gy);
            gxy.set(x, y, gx * gy);
        }
    }
    let mut out = Plane::zeros(w, h);
    if w <= 2 * border || h <= 2 * border {
        return Ok(out);
    }
    for y in border..h - border {
        for x in border..w - border {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for yy in y - r..=y + r {
                for xx in x - r..=x + r {
                    a += gxx.get(xx, yy);
                    b += gxy.get(xx, yy);
                    c += gyy.get(xx, yy);
                }
            }
            let half = 0.5 * (a + c);
            let dev = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            out.set(x, y, (half - dev).max(0.0));
        }
    }
    Ok(out)
}

/// Greedy selection of strong, well-separated local maxima.
pub fn select_features(score: &Plane, params: &FeatureParams) -> Vec<FeaturePoint> {
    let (w, h) = (score.width(), score.height());
    let max = score.data().iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = params.quality * max;
    let mut candidates = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let s = score.get(x, y);
            if s <= 0.0 || s < floor {
                continue;
            }
            let is_max = (y.saturating_sub(1)..(y + 2).min(h))
                .all(|yy| (x.saturating_sub(1)..(x + 2).min(w)).all(|xx| score.get(xx, yy) <= s));
            if is_max {
                candidates.push((s, x, y));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.2, a.1).cmp(&(b.2, b.1))));
    let mut out: Vec<FeaturePoint> = Vec::new();
    let d2 = params.min_dist * params.min_dist;
    for (s, x, y) in candidates {
        if out.len() == params.max_n {
            break;
        }
        let (fx, fy) = (x as f64, y as f64);
        if out.iter().all(|p| (p.x - fx).powi(2) + (p.y - fy).powi(2) >= d2) {
            out.push(FeaturePoint { x: fx, y: fy, response: s });
        }
    }
    out
}
