#![allow(dead_code)]

use chrono::NaiveDate;
use lstfill_core::raster::{Aligned, GeoRef, GridShape};
use lstfill_core::{LandCoverGrid, LstGrid, OcclusionMask, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn georef() -> GeoRef {
    GeoRef::new((600_000.0, 4_400_000.0), (30.0, -30.0), "EPSG:32617").unwrap()
}

pub struct RandomScene {
    pub scene: Scene,
    pub land: LandCoverGrid,
}

/// Blocky land cover with `classes` codes, a smooth field with per-class
/// offsets and noise, and `occlusion` of the pixels masked in small clumps.
pub fn random_scene(seed: u64, size: usize, classes: u8, occlusion: f64) -> RandomScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = GridShape::new(size, size).unwrap();
    let block = rng.gen_range(4..12);
    let nb = size.div_ceil(block);
    let block_class: Vec<u8> = (0..nb * nb).map(|_| rng.gen_range(1..=classes)).collect();
    let class_of = |r: usize, c: usize| block_class[(r / block) * nb + c / block];
    let land = LandCoverGrid::new(
        shape,
        georef(),
        (0..size * size)
            .map(|i| class_of(i / size, i % size))
            .collect(),
    )
    .unwrap();

    let offsets: Vec<f64> = (0..=classes).map(|_| rng.gen_range(-8.0..8.0)).collect();
    let (fx, fy) = (rng.gen_range(0.02..0.2), rng.gen_range(0.02..0.2));
    let values: Vec<f64> = (0..size * size)
        .map(|i| {
            let (r, c) = (i / size, i % size);
            300.0
                + offsets[land.classes()[i] as usize]
                + 2.0 * (fx * c as f64).sin() * (fy * r as f64).cos()
                + rng.gen_range(-0.5..0.5)
        })
        .collect();

    let target = (occlusion * (size * size) as f64).round() as usize;
    let mut occ = vec![false; size * size];
    let mut n = 0;
    while n < target {
        let (r0, c0) = (rng.gen_range(0..size), rng.gen_range(0..size));
        let k = rng.gen_range(1..4);
        for r in r0..(r0 + k).min(size) {
            for c in c0..(c0 + k).min(size) {
                if n < target && !occ[r * size + c] {
                    occ[r * size + c] = true;
                    n += 1;
                }
            }
        }
    }
    let lst = LstGrid::from_values(shape, georef(), values).unwrap();
    let mask = OcclusionMask::new(shape, georef(), occ).unwrap();
    let scene = Scene::new(NaiveDate::from_ymd_opt(2022, 7, 1).unwrap(), lst, mask).unwrap();
    RandomScene { scene, land }
}

/// Direct per-pixel normalized Gaussian sum over clear same-class pixels in
/// the clipped `window` x `window` neighbourhood. `None` for an empty window.
pub fn direct_window_mean(
    scene: &Scene,
    land: &LandCoverGrid,
    window: usize,
    row: usize,
    col: usize,
) -> Option<f64> {
    let shape = scene.lst().shape();
    let sigma = window as f64 / 2.0;
    let half = (window / 2) as isize;
    let gaps = scene.gaps();
    let centre_class = land.classes()[row * shape.width + col];
    let (mut num, mut den) = (0.0, 0.0);
    for dr in -half..=half {
        for dc in -half..=half {
            let (r, c) = (row as isize + dr, col as isize + dc);
            if r < 0 || c < 0 || r >= shape.height as isize || c >= shape.width as isize {
                continue;
            }
            let j = r as usize * shape.width + c as usize;
            if gaps[j] || land.classes()[j] != centre_class {
                continue;
            }
            let d2 = (dr * dr + dc * dc) as f64;
            let w = (1.0 / (2.0 * std::f64::consts::PI * sigma * sigma))
                * (-d2 / (2.0 * sigma * sigma)).exp();
            num += w * scene.lst().values()[j];
            den += w;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Clear same-class values inside the clipped window.
pub fn window_values(
    scene: &Scene,
    land: &LandCoverGrid,
    window: usize,
    row: usize,
    col: usize,
) -> Vec<f64> {
    let shape = scene.lst().shape();
    let half = window / 2;
    let gaps = scene.gaps();
    let class = land.classes()[row * shape.width + col];
    let mut out = Vec::new();
    for r in row.saturating_sub(half)..=(row + half).min(shape.height - 1) {
        for c in col.saturating_sub(half)..=(col + half).min(shape.width - 1) {
            let j = r * shape.width + c;
            if !gaps[j] && land.classes()[j] == class {
                out.push(scene.lst().values()[j]);
            }
        }
    }
    out
}
