use std::path::Path;

use rayon::prelude::*;

use super::config::DerainerSpec;
use super::manifest::SequenceData;
use super::HarnessError;
use crate::decompose::admm_decompose;
use crate::derain::{garg_nayar, spatial_filter, temporal_median};
use crate::framecore::io::{indexed_pngs, load_frame};
use crate::framecore::{Frame, FrameSequence};

/// Runs one derainer over a loaded sequence. `base_dir` resolves the
/// directories of external derainers.
pub fn apply_derainer(spec: &DerainerSpec, data: &SequenceData, base_dir: &Path) -> Result<FrameSequence, HarnessError> {
    let seq = &data.frames;
    let out = match spec {
        DerainerSpec::None { .. } => seq.clone(),
        DerainerSpec::Spatial { mode, k, .. } => {
            let frames = seq
                .frames()
                .par_iter()
                .map(|f| spatial_filter(f, *mode, *k))
                .collect::<Result<Vec<_>, _>>()?;
            FrameSequence::new(frames, seq.fps())?
        }
        DerainerSpec::TemporalMedian { window, .. } => temporal_median(seq, *window)?,
        DerainerSpec::GargNayar { params, .. } => garg_nayar(seq, params)?.derained,
        DerainerSpec::Admm { params, .. } => {
            let frames = seq
                .frames()
                .par_iter()
                .map(|f| {
                    let rain = admm_decompose(&f.luma(), params)?.rain;
                    let ch = f.channels();
                    let samples: Vec<f64> = f
                        .samples()
                        .iter()
                        .enumerate()
                        .map(|(i, s)| s - rain.data()[i / ch])
                        .collect();
                    Ok(Frame::from_clamped(f.width(), f.height(), f.mode(), samples))
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            FrameSequence::new(frames, seq.fps())?
        }
        DerainerSpec::External { dir, .. } => {
            let dir = base_dir.join(dir).join(&data.name);
            let files = indexed_pngs(&dir)?;
            let indices: Vec<u64> = files.iter().map(|(i, _)| *i).collect();
            if indices != data.indices {
                return Err(HarnessError::Data(format!(
                    "{}: frame indices do not match the input sequence",
                    dir.display()
                )));
            }
            let frames = files
                .iter()
                .map(|(_, p)| load_frame(p, seq.mode()))
                .collect::<Result<Vec<_>, _>>()?;
            let ext = FrameSequence::new(frames, seq.fps())?;
            if (ext.width(), ext.height()) != (seq.width(), seq.height()) {
                return Err(HarnessError::Data(format!(
                    "{}: frames are {}x{}, input is {}x{}",
                    dir.display(),
                    ext.width(),
                    ext.height(),
                    seq.width(),
                    seq.height()
                )));
            }
            ext
        }
    };
    Ok(out)
}
