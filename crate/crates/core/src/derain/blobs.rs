use crate::framecore::{BinaryMask, Plane};

use super::GargNayarParams;

/// Elongation reported for blobs whose minor axis has zero variance.
pub const ELONGATION_CAP: f64 = 1e6;

/// Below this standard deviation of the occluded background (sample units)
/// the photometric slope of a blob is not identifiable.
pub const MIN_BACKGROUND_SPREAD: f64 = 1.0;

/// An 8-connected group of candidate rain pixels in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StreakBlob {
    pub pixels: Vec<(usize, usize)>,
    pub centroid: (f64, f64),
    /// Principal axis of the pixel coordinates, in `[0, pi)` from +x towards +y.
    pub orientation: f64,
    /// `sqrt(major / minor)` of the coordinate covariance eigenvalues.
    pub elongation: f64,
    /// Fitted slope of `delta = -beta * background + alpha`; `None` when the
    /// background is too flat for the slope to be identifiable.
    pub beta_hat: Option<f64>,
    pub alpha_hat: f64,
    pub fit_rmse: f64,
    /// Standard deviation of the background samples under the blob.
    pub background_spread: f64,
}

impl StreakBlob {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

fn components(mask: &BinaryMask) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || !mask.get_index(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && mask.get_index(j) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_by_key(|&(x, y)| (y, x));
        out.push(pixels);
    }
    out
}

fn shape(pixels: &[(usize, usize)]) -> ((f64, f64), f64, f64) {
    let n = pixels.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in pixels {
        sx += x as f64;
        sy += y as f64;
    }
    let (cx, cy) = (sx / n, sy / n);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pixels {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    let (cxx, cyy, cxy) = (cxx / n, cyy / n, cxy / n);
    let mean = 0.5 * (cxx + cyy);
    let dev = (0.25 * (cxx - cyy).powi(2) + cxy * cxy).sqrt();
    let (major, minor) = (mean + dev, (mean - dev).max(0.0));
    let mut orientation = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    if orientation < 0.0 {
        orientation += std::f64::consts::PI;
    }
    if orientation >= std::f64::consts::PI {
        orientation -= std::f64::consts::PI;
    }
    let elongation = if major <= 1e-12 {
        1.0
    } else if minor <= 1e-12 * major {
        ELONGATION_CAP
    } else {
        (major / minor).sqrt().min(ELONGATION_CAP)
    };
    ((cx, cy), orientation, elongation)
}

/// Groups candidate pixels into 8-connected blobs and fits each blob's
/// brightening against the occluded background by least squares.
pub fn extract_blobs(mask: &BinaryMask, delta: &Plane, background: &Plane) -> Vec<StreakBlob> {
    assert_eq!((mask.width(), mask.height()), (delta.width(), delta.height()));
    assert_eq!((mask.width(), mask.height()), (background.width(), background.height()));
    components(mask)
        .into_iter()
        .map(|pixels| {
            let (centroid, orientation, elongation) = shape(&pixels);
            let n = pixels.len() as f64;
            let bs: Vec<f64> = pixels.iter().map(|&(x, y)| background.get(x, y)).collect();
            let ds: Vec<f64> = pixels.iter().map(|&(x, y)| delta.get(x, y)).collect();
            let mb = bs.iter().sum::<f64>() / n;
            let md = ds.iter().sum::<f64>() / n;
            let sbb: f64 = bs.iter().map(|b| (b - mb).powi(2)).sum();
            let sbd: f64 = bs.iter().zip(&ds).map(|(b, d)| (b - mb) * (d - md)).sum();
            let spread = (sbb / n).sqrt();
            let (beta_hat, alpha_hat, slope) = if spread >= MIN_BACKGROUND_SPREAD {
                let slope = sbd / sbb;
                (Some(-slope), md - slope * mb, slope)
            } else {
                (None, md, 0.0)
            };
            let sse: f64 = bs
                .iter()
                .zip(&ds)
                .map(|(b, d)| (d - (alpha_hat + slope * b)).powi(2))
                .sum();
            StreakBlob {
                pixels,
                centroid,
                orientation,
                elongation,
                beta_hat,
                alpha_hat,
                fit_rmse: (sse / n).sqrt(),
                background_spread: spread,
            }
        })
        .collect()
}

/// Whether a blob passes the size, slope-range and linearity gates.
pub fn passes_linearity(blob: &StreakBlob, params: &GargNayarParams) -> bool {
    let [lo, hi] = params.beta_range;
    blob.len() >= params.min_streak_pixels
        && blob.fit_rmse <= params.max_fit_rmse
        && blob.beta_hat.is_none_or(|b| (lo..=hi).contains(&b))
}

pub fn photometric_linearity_filter(blobs: Vec<StreakBlob>, params: &GargNayarParams) -> Vec<StreakBlob> {
    blobs.into_iter().filter(|b| passes_linearity(b, params)).collect()
}
