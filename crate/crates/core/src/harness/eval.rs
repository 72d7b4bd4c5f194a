use std::collections::HashMap;

use log::warn;
use rayon::prelude::*;

use super::config::{DerainerSpec, EvalConfig, SegmenterSpec};
use super::derainer::apply_derainer;
use super::manifest::{DatasetManifest, SequenceData};
use super::report::{EvalReport, ReportRow, RowScope};
use super::HarnessError;
use crate::framecore::io::load_binary_dir;
use crate::framecore::{BinaryMask, FrameSequence};
use crate::metrics::{confusion, f_measure, mse, psnr_from_mse, relative_improvement, ssim, ConfusionCounts};
use crate::segment::{segment_sequence, MogParams};
use crate::track::{forward_backward_eval, TrackingReport};

/// Label given to the implicit identity derainer.
pub const BASELINE_LABEL: &str = "none";

struct Cell {
    sequence: String,
    category: String,
    derainer: String,
    baseline: bool,
    evaluator: String,
    metric: String,
    value: Option<f64>,
}

fn is_count(metric: &str) -> bool {
    metric.starts_with("within_")
}

fn relative_of(base: Option<f64>, value: Option<f64>) -> (Option<f64>, &'static str) {
    match (base, value) {
        (_, None) => (None, "undefined"),
        (None, _) => (None, "undefined_baseline"),
        (Some(b), Some(v)) if !b.is_finite() || !v.is_finite() => (None, "non_finite"),
        (Some(b), Some(_)) if b == 0.0 => (None, "zero_baseline"),
        (Some(b), Some(v)) => (relative_improvement(b, v), ""),
    }
}

/// Per-sequence rows followed by one average row per category (and an
/// overall one when there are several categories).
fn build_rows(cells: &[Cell]) -> Vec<ReportRow> {
    let base: HashMap<(&str, &str, &str), Option<f64>> = cells
        .iter()
        .filter(|c| c.baseline)
        .map(|c| ((c.sequence.as_str(), c.evaluator.as_str(), c.metric.as_str()), c.value))
        .collect();
    let mut rows = Vec::new();
    for c in cells {
        let (relative, flag) = if c.baseline {
            (None, if c.value.is_none() { "undefined" } else { "" })
        } else {
            relative_of(base[&(c.sequence.as_str(), c.evaluator.as_str(), c.metric.as_str())], c.value)
        };
        rows.push(ReportRow {
            scope: RowScope::Sequence,
            sequence: c.sequence.clone(),
            derainer: c.derainer.clone(),
            evaluator: c.evaluator.clone(),
            metric: c.metric.clone(),
            baseline: c.baseline,
            value: c.value,
            relative,
            flag: flag.to_string(),
        });
    }

    let mut groups: Vec<String> = Vec::new();
    for c in cells {
        if !groups.contains(&c.category) {
            groups.push(c.category.clone());
        }
    }
    if groups.len() > 1 && !groups.iter().any(|g| g == "all") {
        groups.push("all".into());
    }
    let mut keys: Vec<(&str, &str, &str, bool)> = Vec::new();
    for c in cells {
        let k = (c.derainer.as_str(), c.evaluator.as_str(), c.metric.as_str(), c.baseline);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for g in &groups {
        let in_group = |c: &&Cell| g == "all" || &c.category == g;
        let aggregate = |derainer: &str, evaluator: &str, metric: &str| -> Option<f64> {
            let vals: Vec<f64> = cells
                .iter()
                .filter(in_group)
                .filter(|c| c.derainer == derainer && c.evaluator == evaluator && c.metric == metric)
                .filter_map(|c| c.value.filter(|v| v.is_finite()))
                .collect();
            if vals.is_empty() {
                None
            } else if is_count(metric) {
                Some(vals.iter().sum())
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };
        for &(d, e, m, is_base) in &keys {
            if !cells.iter().filter(in_group).any(|c| c.derainer == d && c.evaluator == e && c.metric == m) {
                continue;
            }
            let value = aggregate(d, e, m);
            let (relative, flag) = if is_base {
                (None, if value.is_none() { "undefined" } else { "" })
            } else {
                let b = keys
                    .iter()
                    .find(|k| k.3 && k.1 == e && k.2 == m)
                    .and_then(|k| aggregate(k.0, e, m));
                relative_of(b, value)
            };
            rows.push(ReportRow {
                scope: RowScope::Average,
                sequence: g.clone(),
                derainer: d.to_string(),
                evaluator: e.to_string(),
                metric: m.to_string(),
                baseline: is_base,
                value,
                relative,
                flag: flag.to_string(),
            });
        }
    }
    rows
}

fn header(kind: &str, manifest: &DatasetManifest, config: &EvalConfig) -> Vec<String> {
    let mut h = vec![
        format!("rainbench {}", env!("CARGO_PKG_VERSION")),
        format!("kind = {kind}"),
        String::new(),
        "[config]".to_string(),
    ];
    h.extend(config.to_toml().lines().map(str::to_string));
    h.push(String::new());
    h.push("[manifest]".to_string());
    h.extend(manifest.to_toml().lines().map(str::to_string));
    h
}

fn derain_all(derainers: &[DerainerSpec], data: &SequenceData, config: &EvalConfig) -> Result<Vec<FrameSequence>, HarnessError> {
    derainers
        .par_iter()
        .map(|d| apply_derainer(d, data, &config.base_dir))
        .collect()
}

fn segmenters(config: &EvalConfig) -> Vec<SegmenterSpec> {
    if config.segmenters.is_empty() {
        vec![SegmenterSpec::Mog {
            label: None,
            params: MogParams::default(),
        }]
    } else {
        config.segmenters.clone()
    }
}

/// Confusion counts summed over annotated frames past the burn-in.
fn segmentation_counts(
    spec: &SegmenterSpec,
    derainer: &str,
    data: &SequenceData,
    seq: &FrameSequence,
    config: &EvalConfig,
) -> Result<ConfusionCounts, HarnessError> {
    let burn_in = spec.burn_in();
    let scored: Vec<&(usize, _)> = data.gt.iter().filter(|(p, _)| *p >= burn_in).collect();
    if scored.is_empty() {
        warn!("{}: no annotated frame past the burn-in of {burn_in}", data.name);
    }
    let masks: HashMap<usize, BinaryMask> = match spec {
        SegmenterSpec::Mog { params, .. } => {
            let s = segment_sequence(seq, params)?;
            s.masks.into_iter().enumerate().collect()
        }
        SegmenterSpec::External { dir, .. } => {
            let dir = config.resolve(dir).join(&data.name).join(derainer);
            let by_index: HashMap<u64, BinaryMask> = load_binary_dir(&dir)?.into_iter().collect();
            let mut out = HashMap::new();
            for (p, _) in &scored {
                let idx = data.indices[*p];
                let m = by_index
                    .get(&idx)
                    .ok_or_else(|| HarnessError::Data(format!("{}: no mask for frame {idx}", dir.display())))?;
                out.insert(*p, m.clone());
            }
            out
        }
    };
    let mut total = ConfusionCounts::default();
    for (p, gt) in scored {
        total += confusion(&masks[p], gt)?;
    }
    Ok(total)
}

/// F-measure of every segmenter on every derainer's output, over the
/// sequences that carry ground truth.
pub fn run_segmentation_eval(manifest: &DatasetManifest, config: &EvalConfig) -> Result<EvalReport, HarnessError> {
    config.validate()?;
    let derainers = config.derainers_with_baseline();
    let segs = segmenters(config);
    let mut cells = Vec::new();
    for entry in &manifest.sequences {
        if entry.gt_masks_dir.is_none() {
            warn!("{}: no ground truth, skipped", entry.name);
            continue;
        }
        let data = SequenceData::load(manifest, entry)?;
        if data.gt.is_empty() {
            warn!("{}: ground-truth directory is empty, skipped", entry.name);
            continue;
        }
        let outputs = derain_all(&derainers, &data, config)?;
        for (i, (d, seq)) in derainers.iter().zip(&outputs).enumerate() {
            for s in &segs {
                let counts = segmentation_counts(s, &d.label(), &data, seq, config)?;
                cells.push(Cell {
                    sequence: data.name.clone(),
                    category: data.category.clone(),
                    derainer: d.label(),
                    baseline: i == 0,
                    evaluator: s.label(),
                    metric: "f_measure".into(),
                    value: f_measure(&counts),
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(HarnessError::Data("no sequence has ground-truth masks".into()));
    }
    Ok(EvalReport {
        kind: "segmentation".into(),
        header: header("segmentation", manifest, config),
        rows: build_rows(&cells),
    })
}

/// Per-run tracking results, in report order.
pub type TrackingRuns = Vec<(String, String, TrackingReport)>;

/// Forward-backward tracking counts for every derainer on every sequence.
pub fn run_tracking_eval(manifest: &DatasetManifest, config: &EvalConfig) -> Result<(EvalReport, TrackingRuns), HarnessError> {
    config.validate()?;
    let derainers = config.derainers_with_baseline();
    let mut cells = Vec::new();
    let mut runs = Vec::new();
    for entry in &manifest.sequences {
        let data = SequenceData::load(manifest, entry)?;
        let outputs = derain_all(&derainers, &data, config)?;
        for (i, (d, seq)) in derainers.iter().zip(&outputs).enumerate() {
            let r = forward_backward_eval(seq, &config.tracking)?;
            for m in config.tracking.margins {
                cells.push(Cell {
                    sequence: data.name.clone(),
                    category: data.category.clone(),
                    derainer: d.label(),
                    baseline: i == 0,
                    evaluator: "fb_track".into(),
                    metric: format!("within_{m}px"),
                    value: Some(r.count_within(m) as f64),
                });
            }
            runs.push((data.name.clone(), d.label(), r));
        }
    }
    if cells.is_empty() {
        return Err(HarnessError::Data("manifest lists no sequences".into()));
    }
    let report = EvalReport {
        kind: "tracking".into(),
        header: header("tracking", manifest, config),
        rows: build_rows(&cells),
    };
    Ok((report, runs))
}

/// PSNR of the pooled MSE and mean luma SSIM against the clean frames.
pub fn run_restoration_eval(manifest: &DatasetManifest, config: &EvalConfig) -> Result<EvalReport, HarnessError> {
    config.validate()?;
    if !config.metrics.psnr && !config.metrics.ssim {
        return Err(HarnessError::Config("both restoration metrics are disabled".into()));
    }
    let derainers = config.derainers_with_baseline();
    let mut cells = Vec::new();
    for entry in &manifest.sequences {
        if entry.clean_dir.is_none() {
            warn!("{}: no clean frames, skipped", entry.name);
            continue;
        }
        let data = SequenceData::load(manifest, entry)?;
        let clean = data.clean.as_ref().expect("clean frames loaded");
        let outputs = derain_all(&derainers, &data, config)?;
        for (i, (d, seq)) in derainers.iter().zip(&outputs).enumerate() {
            let pairs: Vec<_> = seq.frames().iter().zip(clean.frames()).collect();
            let mut push = |metric: &str, value: f64| {
                cells.push(Cell {
                    sequence: data.name.clone(),
                    category: data.category.clone(),
                    derainer: d.label(),
                    baseline: i == 0,
                    evaluator: "reference".into(),
                    metric: metric.into(),
                    value: Some(value),
                })
            };
            if config.metrics.psnr {
                let errs = pairs.par_iter().map(|(a, b)| mse(a, b)).collect::<Result<Vec<_>, _>>()?;
                push("psnr", psnr_from_mse(errs.iter().sum::<f64>() / errs.len() as f64, 255.0));
            }
            if config.metrics.ssim {
                let s = pairs
                    .par_iter()
                    .map(|(a, b)| ssim(&a.luma(), &b.luma()))
                    .collect::<Result<Vec<_>, _>>()?;
                push("ssim", s.iter().sum::<f64>() / s.len() as f64);
            }
        }
    }
    if cells.is_empty() {
        return Err(HarnessError::Data("no sequence has clean reference frames".into()));
    }
    Ok(EvalReport {
        kind: "restoration".into(),
        header: header("restoration", manifest, config),
        rows: build_rows(&cells),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(seq: &str, cat: &str, d: &str, metric: &str, value: Option<f64>) -> Cell {
        Cell {
            sequence: seq.into(),
            category: cat.into(),
            derainer: d.into(),
            baseline: d == "none",
            evaluator: "e".into(),
            metric: metric.into(),
            value,
        }
    }

    #[test]
    fn rows_and_averages() {
        let cells = vec![
            cell("a", "rain", "none", "within_1px", Some(10.0)),
            cell("a", "rain", "tm", "within_1px", Some(15.0)),
            cell("b", "snow", "none", "within_1px", Some(30.0)),
            cell("b", "snow", "tm", "within_1px", Some(25.0)),
        ];
        let rows = build_rows(&cells);
        let get = |scope, seq: &str, d: &str| {
            rows.iter()
                .find(|r| r.scope == scope && r.sequence == seq && r.derainer == d)
                .unwrap()
                .clone()
        };
        assert_eq!(get(RowScope::Sequence, "a", "tm").relative, Some(50.0));
        let all = get(RowScope::Average, "all", "tm");
        assert_eq!(all.value, Some(40.0));
        assert_eq!(all.relative, Some(0.0));
        assert_eq!(get(RowScope::Average, "snow", "none").value, Some(30.0));
        assert!(get(RowScope::Average, "all", "none").baseline);
    }

    #[test]
    fn undefined_values_are_flagged() {
        let cells = vec![
            cell("a", "all", "none", "f_measure", None),
            cell("a", "all", "tm", "f_measure", Some(0.5)),
            cell("b", "all", "none", "f_measure", Some(0.0)),
            cell("b", "all", "tm", "f_measure", Some(0.5)),
        ];
        let rows = build_rows(&cells);
        assert_eq!(rows[0].flag, "undefined");
        assert_eq!(rows[1].flag, "undefined_baseline");
        assert_eq!(rows[3].flag, "zero_baseline");
        let avg: Vec<_> = rows.iter().filter(|r| r.scope == RowScope::Average).collect();
        assert_eq!(avg.len(), 2);
        assert_eq!(avg[0].value, Some(0.0));
        assert_eq!(avg[1].value, Some(0.5));
    }
}
