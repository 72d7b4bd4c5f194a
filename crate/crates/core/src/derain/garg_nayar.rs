use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blobs::{extract_blobs, photometric_linearity_filter, StreakBlob};
use super::orientation::orientation_consensus;
use super::photometric::{background_and_delta, chromatic_filter, inpaint_temporal_mean, photometric_candidates};
use super::DerainError;
use crate::framecore::{BinaryMask, ColorMode, Frame, FrameSequence};
use crate::physics::BETA_MAX;

/// Detection and removal settings. `c`, `beta_range` and `window` follow the
/// original method; the remaining defaults were tuned on synthetic rain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GargNayarParams {
    /// Minimum brightening against both neighbours.
    pub c: f64,
    /// Allowed disagreement between the two brightenings.
    pub equality_tol: f64,
    pub beta_range: [f64; 2],
    pub min_streak_pixels: usize,
    pub max_fit_rmse: f64,
    /// Frames over which streak directions are pooled.
    pub window: usize,
    /// Radians.
    pub orientation_tol: f64,
    pub min_elongation: f64,
    pub use_chromatic: bool,
    pub chromatic_tol: f64,
}

impl Default for GargNayarParams {
    fn default() -> Self {
        Self {
            c: 3.0,
            equality_tol: 1.0,
            beta_range: [0.0, BETA_MAX],
            min_streak_pixels: 5,
            max_fit_rmse: 2.0,
            window: 30,
            orientation_tol: 15f64.to_radians(),
            min_elongation: 3.0,
            use_chromatic: false,
            chromatic_tol: 10.0,
        }
    }
}

impl GargNayarParams {
    pub fn validate(&self) -> Result<(), DerainError> {
        let bad = |m: &str| Err(DerainError::Parameter(m.to_string()));
        if !(self.c > 0.0) {
            return bad("c must be > 0");
        }
        let [lo, hi] = self.beta_range;
        if !(lo <= hi) {
            return bad("beta_range must be ordered");
        }
        let tolerances = [
            self.equality_tol,
            self.max_fit_rmse,
            self.orientation_tol,
            self.min_elongation,
            self.chromatic_tol,
        ];
        if tolerances.iter().any(|t| !(*t >= 0.0)) {
            return bad("tolerances must be >= 0");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GargNayarOutput {
    pub derained: FrameSequence,
    /// Rain pixels replaced in each frame.
    pub confirmed: Vec<BinaryMask>,
}

/// Candidate blobs of interior frame `n` that pass the photometric gates.
pub fn frame_blobs(
    seq: &FrameSequence,
    luma: &FrameSequence,
    n: usize,
    params: &GargNayarParams,
) -> Result<Vec<StreakBlob>, DerainError> {
    let (prev, cur, next) = (&luma.frames()[n - 1], &luma.frames()[n], &luma.frames()[n + 1]);
    let mut candidates = photometric_candidates(prev, cur, next, params.c, params.equality_tol)?;
    if params.use_chromatic {
        let f = seq.frames();
        candidates = chromatic_filter(&candidates, &f[n - 1], &f[n], &f[n + 1], params.chromatic_tol)?;
    }
    let (background, delta) = background_and_delta(prev, cur, next)?;
    let blobs = extract_blobs(&candidates, &delta, &background);
    Ok(photometric_linearity_filter(blobs, params))
}

/// Photometric detection, orientation consensus and temporal-mean removal.
///
/// Detection runs on luma; removal is applied to the input frames. The first
/// and last frames have no two-sided neighbours and pass through unchanged.
pub fn garg_nayar(seq: &FrameSequence, params: &GargNayarParams) -> Result<GargNayarOutput, DerainError> {
    params.validate()?;
    if seq.len() < 3 {
        return Err(DerainError::Parameter(format!(
            "need at least 3 frames, got {}",
            seq.len()
        )));
    }
    if params.use_chromatic && seq.mode() != ColorMode::Rgb {
        return Err(DerainError::Parameter(
            "chromatic refinement needs RGB frames".into(),
        ));
    }
    let luma = seq.to_luma();
    let len = seq.len();
    let per_frame: Vec<Vec<StreakBlob>> = (0..len)
        .into_par_iter()
        .map(|n| {
            if n == 0 || n == len - 1 {
                Ok(Vec::new())
            } else {
                frame_blobs(seq, &luma, n, params)
            }
        })
        .collect::<Result<_, _>>()?;
    let confirmed = orientation_consensus(
        &per_frame,
        seq.width(),
        seq.height(),
        params.window,
        params.orientation_tol,
        params.min_elongation,
    );
    let frames: Vec<Frame> = (0..len)
        .into_par_iter()
        .map(|n| {
            let f = seq.frames();
            if n == 0 || n == len - 1 || confirmed[n].is_clear() {
                Ok(f[n].clone())
            } else {
                inpaint_temporal_mean(&f[n], &f[n - 1], &f[n + 1], &confirmed[n])
            }
        })
        .collect::<Result<_, DerainError>>()?;
    Ok(GargNayarOutput {
        derained: FrameSequence::new(frames, seq.fps())?,
        confirmed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, ColorMode::Luma, |x, y, _| {
            100.0 + 40.0 * ((x as f64) / 5.0).sin() * ((y as f64) / 7.0).cos()
        })
        .unwrap()
    }

    #[test]
    fn dry_static_sequence_passes_through() {
        let f = textured(40, 30);
        let seq = FrameSequence::new(vec![f; 6], 10.0).unwrap();
        let out = garg_nayar(&seq, &GargNayarParams::default()).unwrap();
        assert_eq!(out.derained, seq);
        assert!(out.confirmed.iter().all(|m| m.is_clear()));
    }

    #[test]
    fn short_sequence_rejected() {
        let f = textured(10, 10);
        let seq = FrameSequence::new(vec![f.clone(), f], 10.0).unwrap();
        assert!(matches!(
            garg_nayar(&seq, &GargNayarParams::default()),
            Err(DerainError::Parameter(_))
        ));
    }

    #[test]
    fn chromatic_needs_rgb() {
        let f = textured(10, 10);
        let seq = FrameSequence::new(vec![f; 3], 10.0).unwrap();
        let params = GargNayarParams {
            use_chromatic: true,
            ..Default::default()
        };
        assert!(garg_nayar(&seq, &params).is_err());
    }

    #[test]
    fn single_streak_removed() {
        let bg = textured(30, 30);
        let mut frames = vec![bg.clone(); 5];
        let mut s = bg.samples().to_vec();
        for y in 5..20 {
            let i = y * 30 + 12;
            s[i] += 30.0 - 0.02 * s[i];
        }
        frames[2] = Frame::new(30, 30, ColorMode::Luma, s).unwrap();
        let seq = FrameSequence::new(frames, 10.0).unwrap();
        let out = garg_nayar(&seq, &GargNayarParams::default()).unwrap();
        assert_eq!(out.confirmed[2].count(), 15);
        for (a, b) in out.derained.frames()[2].samples().iter().zip(bg.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
