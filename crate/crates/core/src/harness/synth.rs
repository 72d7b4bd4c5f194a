use std::path::{Path, PathBuf};

use super::config::SynthConfig;
use super::manifest::{DatasetManifest, SequenceEntry};
use super::{io_err, HarnessError};
use crate::framecore::io::{frame_file_name, save_binary_mask, save_sequence, save_tristate_mask};
use crate::physics::{add_sensor_noise, cluttered_background, generate_synthetic_sequence};

/// Renders every configured sequence under `out` and writes a matching
/// `manifest.toml` there.
///
/// Each sequence is laid out as `<name>/{frames,clean,gt,streaks}`. The
/// background, rain and noise of sequence `i` are seeded with `seed + i`.
/// Clean frames are noise-free.
pub fn generate_dataset(cfg: &SynthConfig, out: &Path) -> Result<DatasetManifest, HarnessError> {
    let mut entries = Vec::new();
    for (i, s) in cfg.sequences.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let bg = cluttered_background(s.width, s.height, s.color_mode, seed, s.clutter_blocks);
        let mut rain = s.rain.clone();
        rain.seed = seed;
        let syn = generate_synthetic_sequence(&bg, s.object.as_ref(), &rain, s.frames, s.fps)?;
        let rainy = add_sensor_noise(&syn.rainy, s.noise_sigma, seed)?;

        let root = out.join(&s.name);
        let dirs = ["frames", "clean", "gt", "streaks"].map(|d| root.join(d));
        for d in &dirs {
            std::fs::create_dir_all(d).map_err(io_err(d))?;
        }
        save_sequence(&dirs[0], &rainy, 0)?;
        save_sequence(&dirs[1], &syn.clean, 0)?;
        for (t, mask) in syn.fg_masks.iter().enumerate() {
            if t % s.gt_every == 0 {
                save_tristate_mask(&dirs[2].join(frame_file_name(t as u64)), mask)?;
            }
        }
        for (t, mask) in syn.streak_masks.iter().enumerate() {
            save_binary_mask(&dirs[3].join(frame_file_name(t as u64)), mask)?;
        }
        let rel = |d: &str| PathBuf::from(&s.name).join(d);
        entries.push(SequenceEntry {
            name: s.name.clone(),
            frames_dir: rel("frames"),
            fps: s.fps,
            gt_masks_dir: Some(rel("gt")),
            color_mode: s.color_mode,
            clean_dir: Some(rel("clean")),
            category: s.category.clone(),
        });
    }
    let manifest = DatasetManifest {
        sequences: entries,
        base_dir: out.to_path_buf(),
    };
    let path = out.join("manifest.toml");
    std::fs::write(&path, manifest.to_toml()).map_err(io_err(&path))?;
    Ok(manifest)
}
