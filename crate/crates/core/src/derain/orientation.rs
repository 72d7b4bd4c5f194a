//! Temporal consensus on streak direction.
//!
//! Rain falls in one dominant direction over short time spans. For every
//! frame, the elongated blobs of a centred window vote (weighted by pixel
//! count) into 10 degree axial bins; the dominant direction is the weighted
//! axial mean over the winning bin and its two neighbours. Blobs of the frame
//! that are elongated and lie within the tolerance of that direction are
//! confirmed as rain.

use std::f64::consts::PI;

use super::StreakBlob;
use crate::framecore::BinaryMask;

const BIN_COUNT: usize = 18;

/// Smallest angle between two undirected axes, in `[0, pi/2]`.
pub fn axial_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn bin_of(theta: f64) -> usize {
    ((theta.rem_euclid(PI) / PI * BIN_COUNT as f64) as usize).min(BIN_COUNT - 1)
}

/// Dominant axis of `(orientation, weight)` votes, if any.
pub fn dominant_orientation(votes: &mut [(f64, f64)]) -> Option<f64> {
    if votes.is_empty() {
        return None;
    }
    // fixed summation order keeps the result independent of blob order
    votes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hist = [0.0f64; BIN_COUNT];
    for &(theta, w) in votes.iter() {
        hist[bin_of(theta)] += w;
    }
    let mode = (0..BIN_COUNT).fold(0, |best, i| if hist[i] > hist[best] { i } else { best });
    let near = |b: usize| {
        let d = (b + BIN_COUNT - mode) % BIN_COUNT;
        d == 0 || d == 1 || d == BIN_COUNT - 1
    };
    let (mut s, mut c) = (0.0, 0.0);
    for &(theta, w) in votes.iter() {
        if near(bin_of(theta)) {
            s += w * (2.0 * theta).sin();
            c += w * (2.0 * theta).cos();
        }
    }
    Some((0.5 * s.atan2(c)).rem_euclid(PI))
}

/// Confirmed rain pixels for every frame.
///
/// `per_frame[n]` holds the blobs of frame `n` that passed the photometric
/// gates. The window spans `window / 2` frames either side, clipped.
pub fn orientation_consensus(
    per_frame: &[Vec<StreakBlob>],
    width: usize,
    height: usize,
    window: usize,
    tolerance: f64,
    min_elongation: f64,
) -> Vec<BinaryMask> {
    let radius = window / 2;
    let len = per_frame.len();
    (0..len)
        .map(|n| {
            let mut confirmed = BinaryMask::new(width, height);
            if per_frame[n].is_empty() {
                return confirmed;
            }
            let lo = n.saturating_sub(radius);
            let hi = (n + radius).min(len - 1);
            let mut votes: Vec<(f64, f64)> = per_frame[lo..=hi]
                .iter()
                .flatten()
                .filter(|b| b.elongation >= min_elongation)
                .map(|b| (b.orientation, b.len() as f64))
                .collect();
            let Some(dominant) = dominant_orientation(&mut votes) else {
                return confirmed;
            };
            for blob in &per_frame[n] {
                if blob.elongation >= min_elongation
                    && axial_distance(blob.orientation, dominant) <= tolerance
                {
                    for &(x, y) in &blob.pixels {
                        confirmed.set(x, y, true);
                    }
                }
            }
            confirmed
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(theta_deg: f64, len: usize, elongation: f64, at: (usize, usize)) -> StreakBlob {
        StreakBlob {
            pixels: (0..len).map(|i| (at.0 + i, at.1)).collect(),
            centroid: (at.0 as f64, at.1 as f64),
            orientation: theta_deg.to_radians(),
            elongation,
            beta_hat: Some(0.02),
            alpha_hat: 30.0,
            fit_rmse: 0.0,
            background_spread: 5.0,
        }
    }

    #[test]
    fn axial_distance_wraps() {
        assert!((axial_distance(1f64.to_radians(), 179f64.to_radians()) - 2f64.to_radians()).abs() < 1e-12);
        assert!((axial_distance(0.0, PI / 2.0) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn consistent_blobs_all_confirmed() {
        let frames: Vec<Vec<StreakBlob>> = (0..10)
            .map(|f| {
                (0..6)
                    .map(|k| blob(80.0 + [-3.0, -1.5, 0.0, 1.0, 2.0, 3.0][k], 8, 10.0, (2, 2 * k + f % 2)))
                    .collect()
            })
            .collect();
        let masks = orientation_consensus(&frames, 20, 20, 30, 15f64.to_radians(), 3.0);
        for (m, bl) in masks.iter().zip(&frames) {
            assert_eq!(m.count(), bl.iter().map(|b| b.len()).sum::<usize>());
        }
    }

    #[test]
    fn outlier_direction_rejected() {
        let mut frame = vec![blob(90.0, 8, 10.0, (0, 0)), blob(88.0, 8, 10.0, (0, 2)), blob(92.0, 8, 10.0, (0, 4))];
        frame.push(blob(0.0, 8, 10.0, (0, 8)));
        let masks = orientation_consensus(&[frame.clone()], 10, 10, 30, 15f64.to_radians(), 3.0);
        assert_eq!(masks[0].count(), 24);
        assert!(!masks[0].get(0, 8));
    }

    #[test]
    fn short_blobs_do_not_vote_or_confirm() {
        let frame = vec![blob(80.0, 8, 1.5, (0, 0))];
        let masks = orientation_consensus(&[frame], 10, 10, 30, 15f64.to_radians(), 3.0);
        assert!(masks[0].is_clear());
    }

    #[test]
    fn empty_window() {
        let masks = orientation_consensus(&[vec![], vec![]], 4, 4, 30, 0.3, 3.0);
        assert!(masks.iter().all(|m| m.is_clear()));
    }

    #[test]
    fn blob_order_does_not_matter() {
        let frame: Vec<StreakBlob> = (0..7).map(|k| blob(70.0 + 3.7 * k as f64, 5, 4.0, (0, k))).collect();
        let mut rev = frame.clone();
        rev.reverse();
        let a = orientation_consensus(&[frame], 10, 10, 30, 8f64.to_radians(), 3.0);
        let b = orientation_consensus(&[rev], 10, 10, 30, 8f64.to_radians(), 3.0);
        assert_eq!(a, b);
    }
}
