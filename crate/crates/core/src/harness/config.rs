use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError};
use crate::decompose::DecompositionConfig;
use crate::derain::{GargNayarParams, SpatialMode};
use crate::framecore::ColorMode;
use crate::physics::{MovingRect, RainConfig};
use crate::segment::MogParams;
use crate::track::TrackParams;

fn three() -> usize {
    3
}

/// One deraining method to evaluate. Reports identify it by `label`, or by
/// a name derived from its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DerainerSpec {
    None {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Spatial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default)]
        mode: SpatialMode,
        #[serde(default = "three")]
        k: usize,
    },
    TemporalMedian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default = "three")]
        window: usize,
    },
    GargNayar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default)]
        params: GargNayarParams,
    },
    Admm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default)]
        params: DecompositionConfig,
    },
    /// Frames produced elsewhere, read from `<dir>/<sequence name>/`.
    External {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        dir: PathBuf,
    },
}

impl DerainerSpec {
    pub fn label(&self) -> String {
        let (label, default) = match self {
            DerainerSpec::None { label } => (label, "none".to_string()),
            DerainerSpec::Spatial { label, mode, k } => {
                let m = match mode {
                    SpatialMode::Mean => "mean",
                    SpatialMode::Median => "median",
                };
                (label, format!("spatial_{m}_{k}"))
            }
            DerainerSpec::TemporalMedian { label, window } => (label, format!("temporal_median_{window}")),
            DerainerSpec::GargNayar { label, .. } => (label, "garg_nayar".to_string()),
            DerainerSpec::Admm { label, .. } => (label, "admm".to_string()),
            DerainerSpec::External { label, dir } => (
                label,
                format!(
                    "external_{}",
                    dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
                ),
            ),
        };
        label.clone().unwrap_or(default)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, DerainerSpec::None { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmenterSpec {
    Mog {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default)]
        params: MogParams,
    },
    /// Binary masks produced elsewhere, read from
    /// `<dir>/<sequence name>/<derainer label>/`.
    External {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        dir: PathBuf,
        #[serde(default)]
        burn_in: usize,
    },
}

impl SegmenterSpec {
    pub fn label(&self) -> String {
        match self {
            SegmenterSpec::Mog { label, .. } => label.clone().unwrap_or_else(|| "mog".into()),
            SegmenterSpec::External { label, dir, .. } => label.clone().unwrap_or_else(|| {
                format!(
                    "external_{}",
                    dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
                )
            }),
        }
    }

    pub fn burn_in(&self) -> usize {
        match self {
            SegmenterSpec::Mog { params, .. } => params.burn_in,
            SegmenterSpec::External { burn_in, .. } => *burn_in,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricToggles {
    pub psnr: bool,
    pub ssim: bool,
}

impl Default for MetricToggles {
    fn default() -> Self {
        Self { psnr: true, ssim: true }
    }
}

fn default_derainers() -> Vec<DerainerSpec> {
    vec![DerainerSpec::None { label: None }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub metrics: MetricToggles,
    #[serde(default)]
    pub tracking: TrackParams,
    #[serde(default = "default_derainers")]
    pub derainers: Vec<DerainerSpec>,
    #[serde(default)]
    pub segmenters: Vec<SegmenterSpec>,
    /// Directory that relative paths in the config are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: None,
            metrics: MetricToggles::default(),
            tracking: TrackParams::default(),
            derainers: default_derainers(),
            segmenters: vec![SegmenterSpec::Mog {
                label: None,
                params: MogParams::default(),
            }],
            base_dir: PathBuf::new(),
        }
    }
}

pub(crate) fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|source| HarnessError::Toml {
        path: path.to_path_buf(),
        source,
    })
}

/// A configuration file that cannot be read is a configuration error.
fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    read_toml(path).map_err(|e| match e {
        HarnessError::Io { path, source } => HarnessError::Config(format!("{}: {source}", path.display())),
        e => e,
    })
}

pub(crate) fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

impl EvalConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut cfg: EvalConfig = read_config(path)?;
        cfg.base_dir = parent_dir(path);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.derainers.is_empty() {
            return Err(HarnessError::Config("at least one derainer is required (\"none\" counts)".into()));
        }
        for d in &self.derainers {
            match d {
                DerainerSpec::Spatial { k, .. } if k % 2 == 0 => {
                    return Err(HarnessError::Config(format!("spatial kernel size must be odd, got {k}")));
                }
                DerainerSpec::TemporalMedian { window, .. } if *window < 3 || window % 2 == 0 => {
                    return Err(HarnessError::Config(format!("temporal median window must be odd and >= 3, got {window}")));
                }
                DerainerSpec::GargNayar { params, .. } => params.validate()?,
                DerainerSpec::Admm { params, .. } => params.validate()?,
                _ => {}
            }
        }
        for s in &self.segmenters {
            if let SegmenterSpec::Mog { params, .. } = s {
                params.validate()?;
            }
        }
        self.tracking.validate()?;
        Ok(())
    }

    /// Derainers in evaluation order, with the identity first. An identity is
    /// added when the config lists none.
    pub fn derainers_with_baseline(&self) -> Vec<DerainerSpec> {
        let mut out = self.derainers.clone();
        match out.iter().position(DerainerSpec::is_identity) {
            Some(0) => {}
            Some(i) => {
                let d = out.remove(i);
                out.insert(0, d);
            }
            None => out.insert(0, DerainerSpec::None { label: None }),
        }
        out
    }

    /// The resolved configuration as TOML, embedded in report headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Settings for the `synth` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    #[serde(default)]
    pub seed: u64,
    pub sequences: Vec<SynthSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSequence {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    #[serde(default = "luma")]
    pub color_mode: ColorMode,
    /// Ground truth is written for every `gt_every`-th frame.
    #[serde(default = "one")]
    pub gt_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// The seed inside is replaced by the dataset seed plus the sequence
    /// position.
    #[serde(default)]
    pub rain: RainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<MovingRect>,
    /// Standard deviation of Gaussian sensor noise on the rainy frames.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Static blocks drawn over the textured background.
    #[serde(default)]
    pub clutter_blocks: usize,
}

fn luma() -> ColorMode {
    ColorMode::Luma
}

fn one() -> usize {
    1
}

impl SynthConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let cfg: SynthConfig = read_config(path)?;
        for s in &cfg.sequences {
            if s.gt_every == 0 || s.frames == 0 || !(s.fps > 0.0) {
                return Err(HarnessError::Config(format!("sequence {}: frames, fps and gt_every must be positive", s.name)));
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tagged_entries() {
        let text = r#"
seed = 4

[[derainers]]
kind = "none"

[[derainers]]
kind = "temporal_median"
window = 5

[[derainers]]
kind = "garg_nayar"
label = "gn"
[derainers.params]
c = 4.0

[[segmenters]]
kind = "mog"
[segmenters.params]
alpha = 0.01
"#;
        let cfg: EvalConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.derainers.len(), 3);
        assert_eq!(cfg.derainers[1].label(), "temporal_median_5");
        assert_eq!(cfg.derainers[2].label(), "gn");
        match &cfg.derainers[2] {
            DerainerSpec::GargNayar { params, .. } => assert_eq!(params.c, 4.0),
            other => panic!("{other:?}"),
        }
        match &cfg.segmenters[0] {
            SegmenterSpec::Mog { params, .. } => assert_eq!(params.alpha, 0.01),
            other => panic!("{other:?}"),
        }
        cfg.validate().unwrap();
        let back: EvalConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(toml::from_str::<EvalConfig>("[[derainers]]\nkind = \"none\"\nwindow = 3\n").is_err());
        assert!(toml::from_str::<EvalConfig>("[[derainers]]\nkind = \"magic\"\n").is_err());
        assert!(toml::from_str::<EvalConfig>("bogus = 1\n").is_err());
    }

    #[test]
    fn baseline_goes_first() {
        let cfg = EvalConfig {
            derainers: vec![DerainerSpec::TemporalMedian { label: None, window: 3 }],
            ..Default::default()
        };
        let d = cfg.derainers_with_baseline();
        assert_eq!(d.len(), 2);
        assert!(d[0].is_identity());
        let bad = EvalConfig {
            derainers: vec![DerainerSpec::Spatial { label: None, mode: SpatialMode::Mean, k: 4 }],
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(HarnessError::Config(_))));
    }
}
