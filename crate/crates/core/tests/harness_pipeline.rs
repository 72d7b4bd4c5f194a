use std::path::{Path, PathBuf};
use std::process::Command;

use rainbench::decompose::DecompositionConfig;
use rainbench::framecore::io::{frame_file_name, save_binary_mask, save_tristate_mask};
use rainbench::harness::{
    apply_derainer, emit_report, generate_dataset, run_restoration_eval, run_segmentation_eval, run_tracking_eval,
    DatasetManifest, DerainerSpec, EvalConfig, EvalReport, HarnessError, RowScope, SegmenterSpec, SequenceData,
    SynthConfig, SynthSequence,
};
use rainbench::metrics::relative_improvement;
use rainbench::physics::{MovingRect, RainConfig};
use rainbench::segment::MogParams;
use rainbench::track::TrackParams;
use rainbench::{ColorMode, Label, TriStateMask};

fn synth(dir: &Path, object: bool) -> DatasetManifest {
    let seq = |name: &str, category: &str, seed_shift: f64| SynthSequence {
        name: name.into(),
        width: 48,
        height: 36,
        frames: 24,
        fps: 10.0,
        color_mode: ColorMode::Luma,
        gt_every: 3,
        category: Some(category.into()),
        rain: RainConfig {
            streaks_per_frame: 4.0,
            min_revisit_gap: 2,
            ..Default::default()
        },
        object: object.then_some(MovingRect {
            x: 2.0,
            y: 10.0 + seed_shift,
            width: 10,
            height: 8,
            vx: 1.2,
            vy: 0.0,
            offset: 50.0,
        }),
        noise_sigma: 0.0,
        clutter_blocks: 0,
    };
    let cfg = SynthConfig {
        seed: 3,
        sequences: vec![seq("a", "rain", 0.0), seq("b", "rain", 4.0), seq("c", "snow", 8.0)],
    };
    generate_dataset(&cfg, dir).unwrap();
    DatasetManifest::load(&dir.join("manifest.toml")).unwrap()
}

fn config(derainers: Vec<DerainerSpec>) -> EvalConfig {
    EvalConfig {
        derainers,
        segmenters: vec![SegmenterSpec::Mog {
            label: None,
            params: MogParams { burn_in: 6, ..Default::default() },
        }],
        tracking: TrackParams { span_s: 0.6, ..Default::default() },
        ..Default::default()
    }
}

fn check_report_invariants(r: &EvalReport) {
    for row in r.rows.iter() {
        let baselines = r
            .rows
            .iter()
            .filter(|o| o.scope == row.scope && o.sequence == row.sequence && o.evaluator == row.evaluator && o.metric == row.metric && o.baseline)
            .collect::<Vec<_>>();
        assert_eq!(baselines.len(), 1, "{row:?}");
        if let Some(rel) = row.relative {
            let recomputed = relative_improvement(baselines[0].value.unwrap(), row.value.unwrap()).unwrap();
            assert!((recomputed - rel).abs() <= 1e-9, "{row:?}");
        }
    }
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    assert_eq!(&EvalReport::read_csv(buf.as_slice()).unwrap(), r);
}

#[test]
fn segmentation_report_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), true);
    let cfg = config(vec![
        DerainerSpec::TemporalMedian { label: None, window: 3 },
        DerainerSpec::None { label: None },
        DerainerSpec::None { label: Some("none_again".into()) },
        DerainerSpec::Spatial { label: None, mode: Default::default(), k: 3 },
    ]);
    let r = run_segmentation_eval(&manifest, &cfg).unwrap();
    check_report_invariants(&r);
    // the identity is moved to the front and is the baseline
    assert_eq!(r.rows[0].derainer, "none");
    assert!(r.rows[0].baseline);
    for row in r.rows.iter().filter(|r| r.derainer == "none_again") {
        let base = r
            .rows
            .iter()
            .find(|o| o.baseline && o.scope == row.scope && o.sequence == row.sequence)
            .unwrap();
        assert_eq!(row.value, base.value);
        assert_eq!(row.relative, Some(0.0));
    }
    let averages: Vec<&str> = r.rows.iter().filter(|r| r.scope == RowScope::Average).map(|r| r.sequence.as_str()).collect();
    assert!(averages.contains(&"rain") && averages.contains(&"snow") && averages.contains(&"all"));
    assert!(r.header.iter().any(|h| h.contains("temporal_median")));

    let (csv, md) = emit_report(&r, &dir.path().join("out")).unwrap();
    let back = EvalReport::read_csv(std::fs::File::open(csv).unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(std::fs::read_to_string(md).unwrap().contains("## mog: f_measure"));
}

#[test]
fn baseline_is_a_strict_identity() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), true);
    let data = SequenceData::load(&manifest, &manifest.sequences[0]).unwrap();
    let out = apply_derainer(&DerainerSpec::None { label: None }, &data, dir.path()).unwrap();
    assert_eq!(out, data.frames);
}

#[test]
fn external_outputs_are_ingested() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), true);
    // write temporal-median output as an external derainer, and ground
    // truth foreground as an external segmenter
    let ext = dir.path().join("ext");
    let seg_dir = dir.path().join("seg");
    for entry in &manifest.sequences {
        let data = SequenceData::load(&manifest, entry).unwrap();
        let out = apply_derainer(&DerainerSpec::TemporalMedian { label: None, window: 3 }, &data, dir.path()).unwrap();
        let d = ext.join("tm").join(&data.name);
        std::fs::create_dir_all(&d).unwrap();
        for (f, idx) in out.frames().iter().zip(&data.indices) {
            rainbench::framecore::io::save_frame(&d.join(frame_file_name(*idx)), f).unwrap();
        }
        for label in ["none", "tm", "external_tm"] {
            let d = seg_dir.join(&data.name).join(label);
            std::fs::create_dir_all(&d).unwrap();
            for (p, gt) in &data.gt {
                save_binary_mask(&d.join(frame_file_name(data.indices[*p])), &gt.foreground()).unwrap();
            }
        }
    }
    let mut cfg = config(vec![
        DerainerSpec::None { label: None },
        DerainerSpec::TemporalMedian { label: Some("tm".into()), window: 3 },
        DerainerSpec::External { label: None, dir: PathBuf::from("ext/tm") },
    ]);
    cfg.segmenters.push(SegmenterSpec::External { label: Some("oracle".into()), dir: PathBuf::from("seg"), burn_in: 0 });
    cfg.base_dir = dir.path().to_path_buf();
    let r = run_segmentation_eval(&manifest, &cfg).unwrap();
    check_report_invariants(&r);
    for row in r.rows.iter().filter(|r| r.scope == RowScope::Sequence) {
        if row.evaluator == "oracle" {
            assert_eq!(row.value, Some(1.0));
        }
        if row.derainer == "external_tm" {
            let twin = r
                .rows
                .iter()
                .find(|o| o.derainer == "tm" && o.sequence == row.sequence && o.evaluator == row.evaluator && o.scope == row.scope)
                .unwrap();
            assert_eq!(row.value, twin.value);
        }
    }
    // a missing external mask is a data error
    std::fs::remove_dir_all(seg_dir.join("a").join("tm")).unwrap();
    let err = run_segmentation_eval(&manifest, &cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn undefined_f_is_flagged_and_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = synth(dir.path(), true);
    // sequence b: every annotation don't-care
    let gt_b = dir.path().join("b").join("gt");
    for e in std::fs::read_dir(&gt_b).unwrap() {
        let p = e.unwrap().path();
        save_tristate_mask(&p, &TriStateMask::filled(48, 36, Label::DontCare)).unwrap();
    }
    // sequence c: no annotations at all
    manifest.sequences[2].gt_masks_dir = None;
    let r = run_segmentation_eval(&manifest, &config(vec![DerainerSpec::TemporalMedian { label: None, window: 3 }])).unwrap();
    assert!(!r.rows.iter().any(|row| row.sequence == "c"));
    let b: Vec<_> = r.rows.iter().filter(|row| row.sequence == "b").collect();
    assert!(b.iter().all(|row| row.value.is_none() && !row.flag.is_empty()));
    let a_base = r.rows.iter().find(|row| row.sequence == "a" && row.baseline).unwrap();
    let avg_base = r.rows.iter().find(|row| row.scope == RowScope::Average && row.baseline).unwrap();
    assert_eq!(avg_base.value, a_base.value);

    manifest.sequences[0].gt_masks_dir = None;
    manifest.sequences[1].gt_masks_dir = None;
    let err = run_segmentation_eval(&manifest, &config(vec![DerainerSpec::None { label: None }])).unwrap_err();
    assert!(matches!(err, HarnessError::Data(_)), "{err:?}");
}

#[test]
fn restoration_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), false);
    let cfg = config(vec![
        DerainerSpec::None { label: None },
        DerainerSpec::None { label: Some("identity".into()) },
        DerainerSpec::TemporalMedian { label: None, window: 3 },
        DerainerSpec::Admm {
            label: None,
            params: DecompositionConfig { max_iter: 30, ..Default::default() },
        },
    ]);
    let r = run_restoration_eval(&manifest, &cfg).unwrap();
    for row in &r.rows {
        if row.derainer == "identity" {
            let base = r.rows.iter().find(|o| o.baseline && o.scope == row.scope && o.sequence == row.sequence && o.metric == row.metric).unwrap();
            assert_eq!(row.value, base.value);
        }
        if row.metric == "ssim" {
            let v = row.value.unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
        if row.derainer == "temporal_median_3" && row.metric == "psnr" {
            // exact reconstruction; an average of infinities is not reported
            match row.scope {
                RowScope::Sequence => {
                    assert_eq!(row.value, Some(f64::INFINITY), "{row:?}");
                    assert_eq!(row.flag, "non_finite");
                }
                RowScope::Average => assert!(row.value.is_none() && !row.flag.is_empty()),
            }
        }
    }
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    assert_eq!(EvalReport::read_csv(buf.as_slice()).unwrap(), r);
}

#[test]
fn tracking_report_baseline_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), false);
    let clean_manifest = DatasetManifest {
        sequences: manifest
            .sequences
            .iter()
            .map(|s| rainbench::harness::SequenceEntry { frames_dir: s.clean_dir.clone().unwrap(), ..s.clone() })
            .collect(),
        ..manifest.clone()
    };
    let cfg = config(vec![DerainerSpec::GargNayar { label: None, params: Default::default() }]);
    let (r, runs) = run_tracking_eval(&clean_manifest, &cfg).unwrap();
    check_report_invariants(&r);
    assert_eq!(runs.len(), 6);
    // garg-nayar passes rain-free input through, so nothing changes
    for row in r.rows.iter().filter(|r| !r.baseline) {
        assert_eq!(row.relative, Some(0.0), "{row:?}");
    }
    assert!(r.rows.iter().any(|r| r.metric == "within_1px") && r.rows.iter().any(|r| r.metric == "within_5px"));
}

#[test]
fn manifest_validation() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), true);
    // a mask for a frame that does not exist
    let stray = dir.path().join("a").join("gt").join(frame_file_name(999));
    save_tristate_mask(&stray, &TriStateMask::filled(48, 36, Label::Background)).unwrap();
    let err = SequenceData::load(&manifest, &manifest.sequences[0]).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[[sequences]]\nname = \"x\"\nframes_dir = \"x\"\nfps = 0.0\n").unwrap();
    assert!(matches!(DatasetManifest::load(&bad), Err(HarnessError::Config(_))));
}

fn cli(args: &[&str], cwd: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rainbench")).args(args).current_dir(cwd).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn cli_commands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("synth.toml"),
        "seed = 1\n[[sequences]]\nname = \"s\"\nwidth = 40\nheight = 30\nframes = 12\nfps = 10.0\ngt_every = 2\n[sequences.rain]\nstreaks_per_frame = 3.0\n",
    )
    .unwrap();
    std::fs::write(
        d.join("eval.toml"),
        "output_dir = \"out\"\n[[derainers]]\nkind = \"temporal_median\"\n[[segmenters]]\nkind = \"mog\"\n[segmenters.params]\nburn_in = 4\n[tracking]\nspan_s = 0.5\n",
    )
    .unwrap();
    assert_eq!(cli(&["synth", "--config", "synth.toml", "--out", "data"], d).0, 0);
    assert!(d.join("data/s/frames/000011.png").exists());
    assert_eq!(cli(&["eval-seg", "--manifest", "data/manifest.toml", "--config", "eval.toml"], d).0, 0);
    assert!(d.join("out/segmentation.csv").exists());
    assert_eq!(cli(&["eval-track", "--manifest", "data/manifest.toml", "--config", "eval.toml", "--jobs", "1"], d).0, 0);
    assert!(d.join("out/tracks.csv").exists());
    assert_eq!(cli(&["eval-restore", "--manifest", "data/manifest.toml", "--config", "eval.toml", "--out", "r"], d).0, 0);
    assert_eq!(cli(&["derain", "--manifest", "data/manifest.toml", "--config", "eval.toml", "--out", "dr"], d).0, 0);
    assert!(d.join("dr/temporal_median_3/s/000000.png").exists());
    assert_eq!(cli(&["report", "out/segmentation.csv", "--out", "seg.md"], d).0, 0);
    assert_eq!(
        std::fs::read_to_string(d.join("seg.md")).unwrap(),
        std::fs::read_to_string(d.join("out/segmentation.md")).unwrap()
    );

    // configuration errors
    std::fs::write(d.join("typo.toml"), "[[derainers]]\nkind = \"temporal_median\"\nwindw = 3\n").unwrap();
    assert_eq!(cli(&["eval-seg", "--manifest", "data/manifest.toml", "--config", "typo.toml", "--out", "x"], d).0, 1);
    assert_eq!(cli(&["eval-seg", "--manifest", "data/manifest.toml", "--config", "missing.toml", "--out", "x"], d).0, 1);
    assert_eq!(cli(&["eval-seg", "--manifest", "data/manifest.toml"], d).0, 1);
    assert_eq!(cli(&["frobnicate"], d).0, 1);
    assert_eq!(cli(&["--help"], d).0, 0);
    // data errors
    std::fs::remove_dir_all(d.join("data/s/frames")).unwrap();
    assert_eq!(cli(&["eval-track", "--manifest", "data/manifest.toml", "--out", "x"], d).0, 2);
    assert_eq!(cli(&["report", "nope.csv", "--out", "x.md"], d).0, 2);
}
