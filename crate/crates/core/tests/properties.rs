use proptest::prelude::*;

use driveaware::eval::MinMaxScaler;
use driveaware::face::frame_features;
use driveaware::info::{conditional_entropy, joint_histogram, mutual_information, DiscretizationSpec};
use driveaware::learn::{elm_train, pca_fit, ElmConfig};
use driveaware::preproc::{bandpass_filter, segment_clean, CleanTrial, FilterSpec};
use driveaware::session::synth::{synth_session, SynthConfig};
use driveaware::session::{ChannelLayout, EegTrial, LandmarkFrame, Task, N_CHANNELS};
use driveaware::topomap::{compose_rgb_topomap, ScalpInterpolator};

fn spec() -> DiscretizationSpec {
    DiscretizationSpec::default()
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (32usize..160).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
            0.0f64..1.0,
        )
            .prop_map(|(x, noise, mix)| {
                let y = x.iter().zip(&noise).map(|(a, b)| mix * a + (1.0 - mix) * b).collect();
                (x, y)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mi_is_symmetric_nonnegative_and_bounded((x, y) in pair()) {
        let s = spec();
        let ixy = mutual_information(&x, &y, &s).unwrap();
        let iyx = mutual_information(&y, &x, &s).unwrap();
        let (hx, hy, _) = joint_histogram(&x, &y, &s).unwrap().entropies();
        prop_assert!(ixy >= 0.0);
        prop_assert!((ixy - iyx).abs() < 1e-12);
        prop_assert!(ixy <= hx.min(hy) + 1e-12);
    }

    #[test]
    fn conditional_entropy_lies_between_zero_and_marginal((x, y) in pair()) {
        let s = spec();
        let h = conditional_entropy(&x, &y, &s).unwrap();
        let (_, hy, hxy) = joint_histogram(&x, &y, &s).unwrap().entropies();
        let (hx, _, _) = joint_histogram(&x, &y, &s).unwrap().entropies();
        prop_assert!(h >= -1e-12 && h <= hy + 1e-12);
        // chain rule H(X,Y) = H(X) + H(Y|X)
        prop_assert!((hxy - (hx + h)).abs() < 1e-12);
    }

    #[test]
    fn mi_ignores_increasing_affine_maps((x, y) in pair(), a in 0.01f64..100.0, b in -1e3f64..1e3) {
        let s = spec();
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let i1 = mutual_information(&x, &y, &s).unwrap();
        let i2 = mutual_information(&x2, &y, &s).unwrap();
        prop_assert!((i1 - i2).abs() < 1e-12);
    }
}

fn trial_of(ch: &[f64]) -> EegTrial {
    EegTrial::new("s", "t", vec![ch.to_vec(); N_CHANNELS], ch.len() as f64 / 128.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filter_is_linear(
        x in prop::collection::vec(-50.0f64..50.0, 256),
        y in prop::collection::vec(-50.0f64..50.0, 256),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let f = FilterSpec::default();
        let fx = bandpass_filter(&trial_of(&x), &f).unwrap();
        let fy = bandpass_filter(&trial_of(&y), &f).unwrap();
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fz = bandpass_filter(&trial_of(&z), &f).unwrap();
        for i in 0..256 {
            let want = a * fx.channels[0][i] + b * fy.channels[0][i];
            prop_assert!((fz.channels[0][i] - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn passband_sinusoids_keep_their_phase(freq in 8.0f64..30.0, phase in 0.0f64..std::f64::consts::TAU) {
        let n = 16 * 128;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / 128.0 + phase).sin()).collect();
        let out = bandpass_filter(&trial_of(&x), &FilterSpec::default()).unwrap();
        // forward-backward filtering applies |H|^2 with no delay
        let (lo, hi) = (n / 4, 3 * n / 4);
        let dot: f64 = (lo..hi).map(|i| out.channels[0][i] * x[i]).sum();
        let xx: f64 = (lo..hi).map(|i| x[i] * x[i]).sum();
        let g = dot / xx;
        let resid = (lo..hi).map(|i| (out.channels[0][i] - g * x[i]).abs()).fold(0.0, f64::max);
        prop_assert!(g > 0.9);
        prop_assert!(resid < 0.02, "residual {resid}");
    }

    #[test]
    fn segments_partition_the_trial(k in prop::sample::select(vec![1usize, 2, 4, 8]), seed in 0u64..1000) {
        let n = 256;
        let ch: Vec<Vec<f64>> = (0..N_CHANNELS)
            .map(|c| (0..n).map(|i| ((i * 31 + c * 7) as f64 + seed as f64).sin()).collect())
            .collect();
        let trial = EegTrial::new("s", "t", ch, 2.0).unwrap();
        let mask: Vec<bool> = (0..n).map(|i| (i as u64 + seed).is_multiple_of(37)).collect();
        let clean = CleanTrial::from_mask(trial.clone(), mask.clone());
        let interval = 2.0 / k as f64;
        let segs = segment_clean(&clean, interval).unwrap();
        prop_assert_eq!(segs.len(), k);
        for c in 0..N_CHANNELS {
            let joined: Vec<f64> = segs.iter().flat_map(|s| s.trial.channels[c].iter().copied()).collect();
            prop_assert_eq!(&joined, &trial.channels[c]);
        }
        let joined_mask: Vec<bool> = segs.iter().flat_map(|s| s.rejected_mask.iter().copied()).collect();
        prop_assert_eq!(joined_mask, mask);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn topomap_raster_is_scale_covariant(
        bands in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 14), 3),
        k in 1e-3f64..1e3,
    ) {
        let interp = ScalpInterpolator::new(&ChannelLayout::standard()).unwrap();
        let grids = |s: f64| -> Vec<_> {
            bands.iter().map(|b| interp.interpolate(&b.iter().map(|v| v * s).collect::<Vec<_>>()).unwrap()).collect()
        };
        let (g1, g2) = (grids(1.0), grids(k));
        let a = compose_rgb_topomap([&g1[0], &g1[1], &g1[2]]).unwrap();
        let b = compose_rgb_topomap([&g2[0], &g2[1], &g2[2]]).unwrap();
        prop_assert!(a.pixels == b.pixels);
    }
}

fn usable_frame() -> LandmarkFrame {
    let s = synth_session(&SynthConfig {
        n_subjects: 2,
        trials_per_subject: 2,
        task: Task::Hazard,
        ..SynthConfig::default()
    })
    .unwrap();
    let f = s.trials[0].landmarks.usable_frames().next().unwrap().clone();
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn face_geometry_survives_similarity_transforms(
        angle in -0.6f64..0.6,
        scale in 0.8f64..3.0,
        tx in -200.0f64..200.0,
        ty in -200.0f64..200.0,
    ) {
        let f = usable_frame();
        let base = frame_features(&f).unwrap();
        let (cx, cy) = (f.face_box.x + f.face_box.w / 2.0, f.face_box.y + f.face_box.h / 2.0);
        let (sn, cs) = angle.sin_cos();
        let mut g = f.clone();
        for p in g.points.iter_mut() {
            let (dx, dy) = (p.0 - cx, p.1 - cy);
            *p = (cx + tx + scale * (cs * dx - sn * dy), cy + ty + scale * (sn * dx + cs * dy));
        }
        // the box follows the face: same centre shift and scale
        g.face_box.w *= scale;
        g.face_box.h *= scale;
        g.face_box.x = cx + tx - g.face_box.w / 2.0;
        g.face_box.y = cy + ty - g.face_box.h / 2.0;
        let moved = frame_features(&g).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pca_components_are_orthonormal_and_ordered(
        rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 6), 8..30),
        k in 1usize..=5,
    ) {
        let Ok(p) = pca_fit(&rows, k) else { return Ok(()); };
        for i in 0..p.k() {
            for j in 0..p.k() {
                let d: f64 = p.components.row(i).iter().zip(p.components.row(j).iter()).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - want).abs() < 1e-9);
            }
        }
        prop_assert!(p.explained_variance.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        let z = p.transform(&p.mean).unwrap();
        prop_assert!(z.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn scaler_maps_training_rows_into_unit_box(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 5), 2..20),
    ) {
        let s = MinMaxScaler::fit(&rows);
        for r in s.transform_rows(&rows) {
            prop_assert!(r.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn elm_is_a_function_of_its_seed(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 6..16),
        seed in 0u64..1000,
    ) {
        let y: Vec<u8> = (0..rows.len()).map(|i| (i % 2) as u8).collect();
        let cfg = ElmConfig { hidden: 40, ridge: 1e-6, seed };
        let a = elm_train(&rows, &y, &cfg).unwrap();
        let b = elm_train(&rows, &y, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
