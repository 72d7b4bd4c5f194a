use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{TrackError, TrackStatus};
use crate::framecore::{ColorMode, Frame, Plane};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LkParams {
    /// Side of the square integration window.
    pub window: usize,
    /// Number of coarser levels above the full-resolution image.
    pub levels: usize,
    pub max_iter: usize,
    /// Update size, in pixels, at which a level stops iterating.
    pub eps: f64,
    /// Smallest acceptable eigenvalue of the window-averaged gradient matrix.
    pub min_eigenvalue: f64,
}

impl Default for LkParams {
    fn default() -> Self {
        Self {
            window: 21,
            levels: 3,
            max_iter: 30,
            eps: 0.01,
            min_eigenvalue: 1e-2,
        }
    }
}

impl LkParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        if self.window % 2 == 0 || self.window < 3 {
            return Err(TrackError::Parameter("LK window must be odd and >= 3".into()));
        }
        if self.max_iter == 0 || !(self.eps > 0.0) || !(self.min_eigenvalue >= 0.0) {
            return Err(TrackError::Parameter("LK iteration settings out of range".into()));
        }
        Ok(())
    }
}

/// Gaussian image pyramid, full resolution first.
#[derive(Debug, Clone)]
pub struct Pyramid {
    levels: Vec<Plane>,
}

const MIN_LEVEL_SIDE: usize = 8;

fn downsample(p: &Plane) -> Plane {
    const K: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (p.width(), p.height());
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let rows = Plane::from_fn(w, h, |x, y| {
        (0..5).map(|i| K[i] * p.get(clamp(x as isize + i as isize - 2, w), y)).sum()
    });
    let blurred = Plane::from_fn(w, h, |x, y| {
        (0..5).map(|i| K[i] * rows.get(x, clamp(y as isize + i as isize - 2, h))).sum()
    });
    Plane::from_fn(w.div_ceil(2), h.div_ceil(2), |x, y| blurred.get(2 * x, 2 * y))
}

impl Pyramid {
    pub fn new(frame: &Frame, levels: usize) -> Result<Self, TrackError> {
        frame.ensure_mode(ColorMode::Luma)?;
        let mut out = vec![frame.channel_plane(0)];
        while out.len() <= levels {
            let last = out.last().expect("non-empty");
            if last.width().div_ceil(2) < MIN_LEVEL_SIDE || last.height().div_ceil(2) < MIN_LEVEL_SIDE {
                break;
            }
            out.push(downsample(last));
        }
        Ok(Self { levels: out })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, l: usize) -> &Plane {
        &self.levels[l]
    }
}

/// Bilinear sample with coordinates clamped to the image.
#[inline]
fn sample(p: &Plane, x: f64, y: f64) -> f64 {
    let (w, h) = (p.width(), p.height());
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = ((x as usize).min(w.saturating_sub(2)), (y as usize).min(h.saturating_sub(2)));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let top = p.get(x0, y0) * (1.0 - fx) + p.get(x1, y0) * fx;
    let bottom = p.get(x0, y1) * (1.0 - fx) + p.get(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

fn window_inside(x: f64, y: f64, r: f64, p: &Plane) -> bool {
    x - r >= 0.0 && y - r >= 0.0 && x + r <= (p.width() - 1) as f64 && y + r <= (p.height() - 1) as f64
}

fn track_point(prev: &Pyramid, next: &Pyramid, (px, py): (f64, f64), params: &LkParams) -> ((f64, f64), TrackStatus) {
    let lost = ((px, py), TrackStatus::Lost);
    let r = (params.window / 2) as isize;
    let rf = r as f64;
    if !window_inside(px, py, rf, prev.level(0)) {
        return lost;
    }
    let n_levels = prev.len().min(next.len()).min(params.levels + 1);
    let area = (params.window * params.window) as f64;
    let mut template = Vec::with_capacity(params.window * params.window);
    let (mut gx, mut gy) = (0.0, 0.0);
    for l in (0..n_levels).rev() {
        let (ip, jp) = (prev.level(l), next.level(l));
        let s = 0.5f64.powi(l as i32);
        let (ux, uy) = (px * s, py * s);
        template.clear();
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for j in -r..=r {
            for i in -r..=r {
                let (x, y) = (ux + i as f64, uy + j as f64);
                let ix = 0.5 * (sample(ip, x + 1.0, y) - sample(ip, x - 1.0, y));
                let iy = 0.5 * (sample(ip, x, y + 1.0) - sample(ip, x, y - 1.0));
                a += ix * ix;
                b += ix * iy;
                c += iy * iy;
                template.push((sample(ip, x, y), ix, iy));
            }
        }
        let min_eig = 0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt();
        if min_eig / area < params.min_eigenvalue {
            return lost;
        }
        let det = a * c - b * b;
        let (mut dx, mut dy) = (0.0, 0.0);
        for _ in 0..params.max_iter {
            let (mut bx, mut by) = (0.0, 0.0);
            let mut k = 0;
            for j in -r..=r {
                for i in -r..=r {
                    let (t, ix, iy) = template[k];
                    k += 1;
                    let diff = t - sample(jp, ux + gx + dx + i as f64, uy + gy + dy + j as f64);
                    bx += diff * ix;
                    by += diff * iy;
                }
            }
            let ex = (c * bx - b * by) / det;
            let ey = (a * by - b * bx) / det;
            if !(ex.is_finite() && ey.is_finite()) {
                return lost;
            }
            dx += ex;
            dy += ey;
            if ex.hypot(ey) < params.eps {
                break;
            }
        }
        if l > 0 {
            gx = 2.0 * (gx + dx);
            gy = 2.0 * (gy + dy);
        } else {
            gx += dx;
            gy += dy;
        }
    }
    let end = (px + gx, py + gy);
    // a displacement beyond what the pyramid can resolve means divergence
    let reach = (rf + 1.0) * 2f64.powi(n_levels as i32);
    if !window_inside(end.0, end.1, rf, next.level(0)) || gx.hypot(gy) > reach {
        return lost;
    }
    (end, TrackStatus::Completed)
}

pub(crate) fn lk_track_pyramids(
    prev: &Pyramid,
    next: &Pyramid,
    points: &[(f64, f64)],
    params: &LkParams,
) -> Vec<((f64, f64), TrackStatus)> {
    points.par_iter().map(|&p| track_point(prev, next, p, params)).collect()
}

/// Tracks `points` from `prev` into `next`.
pub fn lk_track(
    prev: &Frame,
    next: &Frame,
    points: &[(f64, f64)],
    params: &LkParams,
) -> Result<Vec<((f64, f64), TrackStatus)>, TrackError> {
    params.validate()?;
    prev.ensure_same_shape(next)?;
    let (a, b) = (Pyramid::new(prev, params.levels)?, Pyramid::new(next, params.levels)?);
    Ok(lk_track_pyramids(&a, &b, points, params))
}
