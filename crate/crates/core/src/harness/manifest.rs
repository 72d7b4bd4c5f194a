use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{parent_dir, read_toml};
use super::HarnessError;
use crate::framecore::io::{indexed_pngs, load_frame, load_tristate_mask};
use crate::framecore::{ColorMode, FrameSequence, TriStateMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceEntry {
    pub name: String,
    pub frames_dir: PathBuf,
    pub fps: f64,
    /// Masks named by frame index; may cover any subset of the frames.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_masks_dir: Option<PathBuf>,
    #[serde(default = "default_mode")]
    pub color_mode: ColorMode,
    /// Rain-free frames with the same indices, for restoration scoring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean_dir: Option<PathBuf>,
    /// Group used for report averages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

fn default_mode() -> ColorMode {
    ColorMode::Luma
}

impl SequenceEntry {
    pub fn category(&self) -> &str {
        self.category.as_deref().unwrap_or("all")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub sequences: Vec<SequenceEntry>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut m: DatasetManifest = read_toml(path)?;
        m.base_dir = parent_dir(path);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut names = HashSet::new();
        for s in &self.sequences {
            if !(s.fps > 0.0) || !s.fps.is_finite() {
                return Err(HarnessError::Config(format!("sequence {}: fps must be > 0", s.name)));
            }
            if !names.insert(&s.name) {
                return Err(HarnessError::Config(format!("duplicate sequence name {}", s.name)));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

/// A sequence loaded into memory together with its annotations.
#[derive(Debug, Clone)]
pub struct SequenceData {
    pub name: String,
    pub category: String,
    pub frames: FrameSequence,
    /// File index of each frame.
    pub indices: Vec<u64>,
    /// `(position in frames, mask)` for annotated frames, in order.
    pub gt: Vec<(usize, TriStateMask)>,
    pub clean: Option<FrameSequence>,
}

fn load_indexed(dir: &Path, mode: ColorMode, fps: f64) -> Result<(Vec<u64>, FrameSequence), HarnessError> {
    let files = indexed_pngs(dir)?;
    if files.is_empty() {
        return Err(HarnessError::Data(format!("no frames in {}", dir.display())));
    }
    let indices = files.iter().map(|(i, _)| *i).collect();
    let frames = files
        .iter()
        .map(|(_, p)| load_frame(p, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let seq = FrameSequence::new(frames, fps).map_err(|e| HarnessError::Data(format!("{}: {e}", dir.display())))?;
    Ok((indices, seq))
}

impl SequenceData {
    pub fn load(manifest: &DatasetManifest, entry: &SequenceEntry) -> Result<Self, HarnessError> {
        let (indices, frames) = load_indexed(&manifest.resolve(&entry.frames_dir), entry.color_mode, entry.fps)?;
        let mut gt = Vec::new();
        if let Some(dir) = &entry.gt_masks_dir {
            let dir = manifest.resolve(dir);
            let known: BTreeSet<u64> = indices.iter().copied().collect();
            for (idx, path) in indexed_pngs(&dir)? {
                if !known.contains(&idx) {
                    return Err(HarnessError::Data(format!(
                        "{}: mask {idx} has no matching frame",
                        entry.name
                    )));
                }
                let mask = load_tristate_mask(&path)?;
                if (mask.width(), mask.height()) != (frames.width(), frames.height()) {
                    return Err(HarnessError::Data(format!(
                        "{}: mask {idx} is {}x{}, frames are {}x{}",
                        entry.name,
                        mask.width(),
                        mask.height(),
                        frames.width(),
                        frames.height()
                    )));
                }
                let pos = indices.iter().position(|&i| i == idx).expect("known index");
                gt.push((pos, mask));
            }
        }
        let clean = match &entry.clean_dir {
            None => None,
            Some(dir) => {
                let (ci, clean) = load_indexed(&manifest.resolve(dir), entry.color_mode, entry.fps)?;
                if ci != indices {
                    return Err(HarnessError::Data(format!(
                        "{}: clean frames do not pair with the input frames ({} vs {})",
                        entry.name,
                        ci.len(),
                        indices.len()
                    )));
                }
                if (clean.width(), clean.height()) != (frames.width(), frames.height()) {
                    return Err(HarnessError::Data(format!("{}: clean frames differ in size", entry.name)));
                }
                Some(clean)
            }
        };
        Ok(Self {
            name: entry.name.clone(),
            category: entry.category().to_string(),
            frames,
            indices,
            gt,
            clean,
        })
    }
}
