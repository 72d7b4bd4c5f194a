use proptest::prelude::*;
use rainbench::derain::{
    extract_blobs, garg_nayar, orientation_consensus, photometric_candidates, spatial_filter, temporal_median,
    GargNayarParams, SpatialMode, StreakBlob,
};
use rainbench::physics::{
    generate_synthetic_sequence, rain_extinction, render_streaks, snow_extinction, textured_background, ExtinctionModel,
    RainConfig,
};
use rainbench::{BinaryMask, ColorMode, Frame, FrameSequence, Plane};

fn rainy_static(seed: u64, w: usize, h: usize, n: usize, gap: usize) -> rainbench::physics::SyntheticSequence {
    let bg = textured_background(w, h, ColorMode::Luma, seed);
    let rain = RainConfig {
        streaks_per_frame: 6.0,
        seed,
        min_revisit_gap: gap,
        ..Default::default()
    };
    generate_synthetic_sequence(&bg, None, &rain, n, 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn median_reconstructs_non_recurring_rain(seed in any::<u64>()) {
        let syn = rainy_static(seed, 48, 36, 12, 2);
        let out = temporal_median(&syn.rainy, 3).unwrap();
        prop_assert_eq!(out, syn.clean);
    }

    #[test]
    fn garg_nayar_touches_only_confirmed_pixels(seed in any::<u64>()) {
        let syn = rainy_static(seed, 48, 36, 8, 0);
        let out = garg_nayar(&syn.rainy, &GargNayarParams::default()).unwrap();
        prop_assert_eq!(out.derained.len(), syn.rainy.len());
        for (n, (a, b)) in out.derained.frames().iter().zip(syn.rainy.frames()).enumerate() {
            prop_assert!(a.same_shape(b));
            for i in 0..a.pixel_count() {
                if !out.confirmed[n].get_index(i) {
                    prop_assert_eq!(a.pixel(i), b.pixel(i));
                }
            }
        }
    }

    #[test]
    fn derainers_preserve_shape(seed in any::<u64>(), rgb in any::<bool>(), k in prop_oneof![Just(1usize), Just(3), Just(5)]) {
        let mode = if rgb { ColorMode::Rgb } else { ColorMode::Luma };
        let bg = textured_background(20, 14, mode, seed);
        let rain = RainConfig { streaks_per_frame: 3.0, seed, ..Default::default() };
        let seq = generate_synthetic_sequence(&bg, None, &rain, 5, 10.0).unwrap().rainy;
        let check = |out: &FrameSequence| {
            out.len() == seq.len() && out.width() == seq.width() && out.height() == seq.height() && out.mode() == seq.mode()
        };
        prop_assert!(check(&temporal_median(&seq, 3).unwrap()));
        prop_assert!(check(&garg_nayar(&seq, &GargNayarParams::default()).unwrap().derained));
        for mode in [SpatialMode::Mean, SpatialMode::Median] {
            let f = spatial_filter(&seq.frames()[0], mode, k).unwrap();
            prop_assert!(f.same_shape(&seq.frames()[0]));
        }
    }

    #[test]
    fn candidates_anti_monotone_in_c(seed in any::<u64>(), c1 in 0.0f64..40.0, dc in 0.0f64..40.0) {
        let syn = rainy_static(seed, 32, 24, 3, 0);
        let f = syn.rainy.frames();
        let lo = photometric_candidates(&f[0], &f[1], &f[2], c1, 2.0).unwrap();
        let hi = photometric_candidates(&f[0], &f[1], &f[2], c1 + dc, 2.0).unwrap();
        for i in 0..lo.bits().len() {
            prop_assert!(!hi.get_index(i) || lo.get_index(i));
        }
    }

    #[test]
    fn consensus_ignores_blob_order(seed in any::<u64>(), rot in 0usize..50) {
        let syn = rainy_static(seed, 64, 48, 4, 0);
        let luma = &syn.rainy;
        let blobs: Vec<Vec<StreakBlob>> = (0..luma.len()).map(|n| {
            let delta = Plane::from_fn(64, 48, |_, _| 10.0);
            let bg = Plane::from_fn(64, 48, |x, y| 50.0 + (x + y) as f64);
            extract_blobs(&syn.streak_masks[n], &delta, &bg)
        }).collect();
        let mut shuffled = blobs.clone();
        for b in &mut shuffled {
            if !b.is_empty() {
                let r = rot % b.len();
                b.rotate_left(r);
                b.reverse();
            }
        }
        let tol = 15f64.to_radians();
        prop_assert_eq!(
            orientation_consensus(&blobs, 64, 48, 30, tol, 3.0),
            orientation_consensus(&shuffled, 64, 48, 30, tol, 3.0)
        );
    }

    #[test]
    fn spatial_filters_stay_within_input_range(values in prop::collection::vec(0.0f64..=255.0, 64), k in prop_oneof![Just(3usize), Just(5)]) {
        let f = Frame::new(8, 8, ColorMode::Luma, values.clone()).unwrap();
        let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        for mode in [SpatialMode::Mean, SpatialMode::Median] {
            let out = spatial_filter(&f, mode, k).unwrap();
            prop_assert!(out.samples().iter().all(|&s| s >= lo - 1e-9 && s <= hi + 1e-9));
        }
    }

    #[test]
    fn rain_never_darkens(seed in any::<u64>(), beta in 0.0f64..0.039, extra in 0.0f64..40.0, rgb in any::<bool>()) {
        let mode = if rgb { ColorMode::Rgb } else { ColorMode::Luma };
        let clean = textured_background(24, 18, mode, seed);
        let cfg = RainConfig { beta, alpha: 255.0 * beta + extra, seed, streaks_per_frame: 8.0, ..Default::default() };
        let (wet, mask) = render_streaks(&clean, &cfg, seed % 100).unwrap();
        prop_assert!(wet.samples().iter().zip(clean.samples()).all(|(w, c)| w >= c));
        let ch = clean.channels();
        for i in 0..clean.pixel_count() {
            if !mask.get_index(i) {
                prop_assert_eq!(&wet.samples()[i * ch..(i + 1) * ch], &clean.samples()[i * ch..(i + 1) * ch]);
            }
        }
    }

    #[test]
    fn snow_is_rain_at_a_tenth(a in 0.0f64..20.0, b in -2.0f64..3.0, s in 0.0f64..500.0) {
        let snow = snow_extinction(&ExtinctionModel::snow(a, b).unwrap(), s).unwrap();
        let rain = rain_extinction(&ExtinctionModel::rain(a, b).unwrap(), s / 10.0).unwrap();
        prop_assert!((snow - rain).abs() <= 1e-12 * rain.abs().max(1e-300) || snow == rain);
    }

    #[test]
    fn rain_extinction_monotone(a in 1e-3f64..20.0, b in 1e-3f64..3.0, r in 0.0f64..500.0, dr in 0.0f64..100.0) {
        let m = ExtinctionModel::rain(a, b).unwrap();
        prop_assert!(rain_extinction(&m, r + dr).unwrap() >= rain_extinction(&m, r).unwrap());
    }
}

#[test]
fn revisit_gap_is_honoured() {
    let syn = rainy_static(3, 48, 36, 30, 2);
    for t in 2..syn.streak_masks.len() {
        let mut seen = BinaryMask::new(48, 36);
        seen.union_with(&syn.streak_masks[t - 2]);
        seen.union_with(&syn.streak_masks[t - 1]);
        assert_eq!(seen.intersection_count(&syn.streak_masks[t]), 0, "frame {t}");
    }
}
