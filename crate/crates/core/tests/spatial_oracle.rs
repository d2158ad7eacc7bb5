mod common;

use common::{direct_window_mean, random_scene, window_values};
use lstfill_core::spatial::{local_filter, SpatialSource};
use lstfill_core::SpatialParams;
use proptest::prelude::*;

#[test]
fn separable_filter_matches_direct_sum() {
    for seed in 0..6u64 {
        let classes = 2 + (seed % 3) as u8;
        let occlusion = 0.01 + 0.09 * (seed as f64 / 5.0);
        let rs = random_scene(seed, 48, classes, occlusion);
        for window in [75usize, 15] {
            let params = SpatialParams {
                window,
                theta_star: 0.5,
            };
            let pred = local_filter(&rs.scene, &rs.land, &params).unwrap();
            let gaps = rs.scene.gaps();
            for i in (0..gaps.len()).filter(|i| gaps[*i]) {
                let (r, c) = (i / 48, i % 48);
                if let Some(expected) = direct_window_mean(&rs.scene, &rs.land, window, r, c) {
                    assert_eq!(pred.source[i], SpatialSource::Local);
                    let got = pred.grid.values()[i];
                    assert!(
                        (got - expected).abs() < 1e-3,
                        "seed {seed} f {window} ({r},{c}): {got} vs {expected}"
                    );
                } else {
                    assert!(pred.source[i].is_fallback());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filtered_pixels_stay_within_window_range(seed in any::<u64>(), classes in 2u8..5, occ in 0.01f64..0.3, window in prop::sample::select(vec![5usize, 11, 21])) {
        let rs = random_scene(seed, 32, classes, occ);
        let pred = local_filter(&rs.scene, &rs.land, &SpatialParams { window, theta_star: 0.5 }).unwrap();
        let gaps = rs.scene.gaps();
        for i in 0..gaps.len() {
            if !gaps[i] {
                prop_assert_eq!(pred.grid.values()[i], rs.scene.lst().values()[i]);
                continue;
            }
            if pred.source[i] == SpatialSource::Local {
                let vals = window_values(&rs.scene, &rs.land, window, i / 32, i % 32);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let v = pred.grid.values()[i];
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{} not in [{}, {}]", v, lo, hi);
            }
        }
    }
}
