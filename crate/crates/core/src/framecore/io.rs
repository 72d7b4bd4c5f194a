//! PNG ingestion and output for frames and masks.
//!
//! Frame directories hold 8-bit PNG files whose stems are decimal frame
//! indices (`000001.png`, `000002.png`, ...). Mask files are 8-bit
//! grayscale PNGs using the 0 / 128 / 255 tri-state encoding; binary masks
//! use 0 / 255.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageReader, RgbImage};

use super::{BinaryMask, ColorMode, Frame, FrameError, FrameSequence, Label, TriStateMask};

fn io_err(path: &Path, source: std::io::Error) -> FrameError {
    FrameError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn decode(path: &Path) -> Result<DynamicImage, FrameError> {
    ImageReader::open(path)
        .map_err(|e| io_err(path, e))?
        .decode()
        .map_err(|e| FrameError::Format(format!("{}: {e}", path.display())))
}

/// PNG files in `dir` keyed by the integer value of their file stem, sorted.
pub fn indexed_pngs(dir: &Path) -> Result<Vec<(u64, PathBuf)>, FrameError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let index: u64 = stem.parse().map_err(|_| {
            FrameError::Format(format!(
                "{}: file name is not a decimal frame index",
                path.display()
            ))
        })?;
        out.push((index, path));
    }
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(FrameError::Format(format!(
            "duplicate frame index {} in {}",
            w[0].0,
            dir.display()
        )));
    }
    Ok(out)
}

pub fn load_frame(path: &Path, mode: ColorMode) -> Result<Frame, FrameError> {
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let is_gray = matches!(
        img,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_)
    );
    match (mode, is_gray) {
        (ColorMode::Luma, true) => {
            let buf = img.to_luma8();
            Frame::new(w, h, mode, buf.into_raw().into_iter().map(f64::from).collect())
        }
        (ColorMode::Luma, false) => {
            let buf = img.to_rgb8();
            let rgb = Frame::new(
                w,
                h,
                ColorMode::Rgb,
                buf.into_raw().into_iter().map(f64::from).collect(),
            )?;
            rgb.to_luma()
        }
        (ColorMode::Rgb, _) => {
            let buf = img.to_rgb8();
            Frame::new(w, h, mode, buf.into_raw().into_iter().map(f64::from).collect())
        }
    }
}

/// Loads every indexed PNG of a directory, in index order.
pub fn load_sequence(dir: &Path, mode: ColorMode, fps: f64) -> Result<FrameSequence, FrameError> {
    let files = indexed_pngs(dir)?;
    if files.is_empty() {
        return Err(FrameError::Format(format!("{}: no frames found", dir.display())));
    }
    let mut frames: Vec<Frame> = Vec::with_capacity(files.len());
    for (_, path) in &files {
        let f = load_frame(path, mode)?;
        if let Some(first) = frames.first() {
            if f.width() != first.width() || f.height() != first.height() {
                return Err(FrameError::Format(format!(
                    "{}: {}x{} frame in a {}x{} sequence",
                    path.display(),
                    f.width(),
                    f.height(),
                    first.width(),
                    first.height()
                )));
            }
        }
        frames.push(f);
    }
    FrameSequence::new(frames, fps)
}

pub fn save_frame(path: &Path, frame: &Frame) -> Result<(), FrameError> {
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let bytes = frame.quantized();
    let res = match frame.mode() {
        ColorMode::Luma => GrayImage::from_raw(w, h, bytes).map(|b| b.save(path)),
        ColorMode::Rgb => RgbImage::from_raw(w, h, bytes).map(|b| b.save(path)),
    };
    res.expect("buffer length matches dimensions")
        .map_err(|e| FrameError::Format(format!("{}: {e}", path.display())))
}

pub fn frame_file_name(index: u64) -> String {
    format!("{index:06}.png")
}

/// Writes frames as `{first_index + i:06}.png`, creating `dir` if needed.
pub fn save_sequence(dir: &Path, seq: &FrameSequence, first_index: u64) -> Result<(), FrameError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (i, f) in seq.frames().iter().enumerate() {
        save_frame(&dir.join(frame_file_name(first_index + i as u64)), f)?;
    }
    Ok(())
}

fn load_gray_bytes(path: &Path) -> Result<(usize, usize, Vec<u8>), FrameError> {
    match decode(path)? {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Ok((w as usize, h as usize, buf.into_raw()))
        }
        other => Err(FrameError::Format(format!(
            "{}: masks must be 8-bit grayscale, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

fn save_gray_bytes(path: &Path, w: usize, h: usize, bytes: Vec<u8>) -> Result<(), FrameError> {
    GrayImage::from_raw(w as u32, h as u32, bytes)
        .expect("buffer length matches dimensions")
        .save(path)
        .map_err(|e| FrameError::Format(format!("{}: {e}", path.display())))
}

pub fn load_tristate_mask(path: &Path) -> Result<TriStateMask, FrameError> {
    let (w, h, bytes) = load_gray_bytes(path)?;
    let mut labels = Vec::with_capacity(bytes.len());
    for (i, &b) in bytes.iter().enumerate() {
        let label = Label::from_byte(b).ok_or_else(|| FrameError::MaskValue {
            path: path.to_path_buf(),
            value: b,
            x: i % w,
            y: i / w,
        })?;
        labels.push(label);
    }
    TriStateMask::new(w, h, labels)
}

pub fn save_tristate_mask(path: &Path, mask: &TriStateMask) -> Result<(), FrameError> {
    let bytes = mask.labels().iter().map(|l| l.to_byte()).collect();
    save_gray_bytes(path, mask.width(), mask.height(), bytes)
}

pub fn load_binary_mask(path: &Path) -> Result<BinaryMask, FrameError> {
    let (w, h, bytes) = load_gray_bytes(path)?;
    let mut bits = Vec::with_capacity(bytes.len());
    for (i, &b) in bytes.iter().enumerate() {
        bits.push(match b {
            0 => false,
            255 => true,
            value => {
                return Err(FrameError::MaskValue {
                    path: path.to_path_buf(),
                    value,
                    x: i % w,
                    y: i / w,
                })
            }
        });
    }
    BinaryMask::from_bits(w, h, bits)
}

pub fn save_binary_mask(path: &Path, mask: &BinaryMask) -> Result<(), FrameError> {
    let bytes = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    save_gray_bytes(path, mask.width(), mask.height(), bytes)
}

/// Loads a sparse directory of tri-state masks keyed by frame index.
pub fn load_tristate_dir(dir: &Path) -> Result<Vec<(u64, TriStateMask)>, FrameError> {
    indexed_pngs(dir)?
        .into_iter()
        .map(|(i, p)| load_tristate_mask(&p).map(|m| (i, m)))
        .collect()
}

pub fn load_binary_dir(dir: &Path) -> Result<Vec<(u64, BinaryMask)>, FrameError> {
    indexed_pngs(dir)?
        .into_iter()
        .map(|(i, p)| load_binary_mask(&p).map(|m| (i, m)))
        .collect()
}
