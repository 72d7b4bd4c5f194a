use serde::{Deserialize, Serialize};

use super::DerainError;
use crate::framecore::{Frame, FrameSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialMode {
    #[default]
    Mean,
    Median,
}

/// Lower median: the element at rank `(n - 1) / 2`. Always one of the inputs.
pub(crate) fn lower_median(values: &mut [f64]) -> f64 {
    let mid = (values.len() - 1) / 2;
    *values.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Per-channel `k x k` mean or median with edge replication.
pub fn spatial_filter(frame: &Frame, mode: SpatialMode, k: usize) -> Result<Frame, DerainError> {
    if k == 0 || k % 2 == 0 {
        return Err(DerainError::Parameter(format!("kernel size must be odd, got {k}")));
    }
    let (w, h, ch) = (frame.width(), frame.height(), frame.channels());
    let r = (k / 2) as isize;
    let clampx = |v: isize| v.clamp(0, w as isize - 1) as usize;
    let clampy = |v: isize| v.clamp(0, h as isize - 1) as usize;
    let mut out = Vec::with_capacity(frame.samples().len());
    let mut window = Vec::with_capacity(k * k);
    for y in 0..h as isize {
        for x in 0..w as isize {
            for c in 0..ch {
                window.clear();
                for dy in -r..=r {
                    for dx in -r..=r {
                        window.push(frame.get(clampx(x + dx), clampy(y + dy), c));
                    }
                }
                out.push(match mode {
                    SpatialMode::Mean => window.iter().sum::<f64>() / window.len() as f64,
                    SpatialMode::Median => lower_median(&mut window),
                });
            }
        }
    }
    Ok(Frame::from_clamped(w, h, frame.mode(), out))
}

/// Per-pixel median over `window` frames centred on each output frame.
///
/// Windows are clipped at the sequence ends. When the clipped window holds an
/// even number of frames the lower median is taken, so every output sample
/// is one of the observed samples.
pub fn temporal_median(seq: &FrameSequence, window: usize) -> Result<FrameSequence, DerainError> {
    if window < 3 || window % 2 == 0 {
        return Err(DerainError::Parameter(format!(
            "temporal window must be odd and >= 3, got {window}"
        )));
    }
    if seq.len() < 2 {
        return Err(DerainError::Parameter("temporal median needs at least 2 frames".into()));
    }
    let radius = window / 2;
    let first = &seq.frames()[0];
    let n_samples = first.samples().len();
    let mut frames = Vec::with_capacity(seq.len());
    let mut values = Vec::with_capacity(window);
    for n in 0..seq.len() {
        let win = seq.temporal_window(n, radius)?;
        let mut out = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            values.clear();
            values.extend(win.frames.iter().map(|f| f.samples()[i]));
            out.push(lower_median(&mut values));
        }
        frames.push(Frame::from_clamped(first.width(), first.height(), first.mode(), out));
    }
    Ok(FrameSequence::new(frames, seq.fps())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framecore::ColorMode;

    fn impulse() -> Frame {
        Frame::from_fn(5, 5, ColorMode::Luma, |x, y, _| if (x, y) == (2, 2) { 255.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn constant_frame_unchanged() {
        let f = Frame::filled(6, 4, ColorMode::Rgb, 77.0).unwrap();
        for mode in [SpatialMode::Mean, SpatialMode::Median] {
            let out = spatial_filter(&f, mode, 3).unwrap();
            assert!(out.samples().iter().all(|&s| (s - 77.0).abs() < 1e-12));
        }
    }

    #[test]
    fn impulse_response() {
        let med = spatial_filter(&impulse(), SpatialMode::Median, 3).unwrap();
        assert_eq!(med.get(2, 2, 0), 0.0);
        let mean = spatial_filter(&impulse(), SpatialMode::Mean, 3).unwrap();
        assert!((mean.get(2, 2, 0) - 255.0 / 9.0).abs() < 1e-12);
        assert!((mean.get(1, 1, 0) - 255.0 / 9.0).abs() < 1e-12);
        assert_eq!(mean.get(0, 0, 0), 0.0);
    }

    #[test]
    fn even_kernel_rejected() {
        assert!(matches!(
            spatial_filter(&impulse(), SpatialMode::Mean, 4),
            Err(DerainError::Parameter(_))
        ));
    }

    fn seq_of(values: &[f64]) -> FrameSequence {
        let frames = values
            .iter()
            .map(|&v| Frame::filled(2, 2, ColorMode::Luma, v).unwrap())
            .collect();
        FrameSequence::new(frames, 10.0).unwrap()
    }

    #[test]
    fn median_of_three() {
        let out = temporal_median(&seq_of(&[100.0, 130.0, 100.0]), 3).unwrap();
        assert_eq!(out.frames()[1].get(0, 0, 0), 100.0);
        // clipped ends take the lower of the two available samples
        assert_eq!(out.frames()[0].get(0, 0, 0), 100.0);
    }

    #[test]
    fn static_sequence_unchanged() {
        let s = seq_of(&[42.0; 6]);
        assert_eq!(temporal_median(&s, 5).unwrap(), s);
    }

    #[test]
    fn temporal_parameter_errors() {
        assert!(temporal_median(&seq_of(&[1.0, 2.0, 3.0]), 4).is_err());
        assert!(temporal_median(&seq_of(&[1.0, 2.0, 3.0]), 1).is_err());
        assert!(temporal_median(&seq_of(&[1.0]), 3).is_err());
    }
}
