//! Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on
//! any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use common::{direct_window_mean, random_scene, window_values};
use lstfill_core::eval::{
    ablation_suite, broadband_emissivity, insitu_lst, upwelling_flux, OcclusionSpec, StationRecord,
};
use lstfill_core::raster::GridShape;
use lstfill_core::spatial::{local_filter, SpatialSource};
use lstfill_core::synthetic::{synthetic_catalog, SyntheticSpec};
use lstfill_core::temporal::temporal_channel;
use lstfill_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn c1_spatial_oracle() -> Verdict {
    let start = Instant::now();
    let params = SpatialParams::default();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for seed in 0..20u64 {
        let classes = 2 + (seed % 3) as u8;
        let occlusion = 0.01 + 0.09 * (seed as f64 / 19.0);
        let rs = random_scene(1000 + seed, 64, classes, occlusion);
        let pred = local_filter(&rs.scene, &rs.land, &params).unwrap();
        let observed = rs.scene.lst().values();
        for (i, gap) in rs.scene.gaps().iter().enumerate() {
            let expected = if *gap {
                match direct_window_mean(&rs.scene, &rs.land, params.window, i / 64, i % 64) {
                    Some(v) => v,
                    None => continue,
                }
            } else {
                observed[i]
            };
            worst = worst.max((pred.grid.values()[i] - expected).abs());
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-3 && elapsed < Duration::from_secs(30),
        format!(
            "{checked} pixels, max |diff| {worst:.2e} K, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_pass_through_convexity() -> Verdict {
    let start = Instant::now();
    let params = SpatialParams::default();
    let (mut changed, mut outside, mut local) = (0usize, 0usize, 0usize);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = rng.gen_range(2..=4);
        let occlusion = rng.gen_range(0.01..0.3);
        let rs = random_scene(5000 + seed, 64, classes, occlusion);
        let pred = local_filter(&rs.scene, &rs.land, &params).unwrap();
        for (i, gap) in rs.scene.gaps().iter().enumerate() {
            if !gap {
                changed += usize::from(pred.grid.values()[i] != rs.scene.lst().values()[i]);
            } else if pred.source[i] == SpatialSource::Local {
                local += 1;
                let vals = window_values(&rs.scene, &rs.land, params.window, i / 64, i % 64);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let v = pred.grid.values()[i];
                outside += usize::from(v < lo - 1e-9 || v > hi + 1e-9);
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        changed == 0 && outside == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{changed} clear pixels changed, {outside}/{local} filtered pixels outside window range, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn synth_spec(seed: u64) -> SyntheticSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SyntheticSpec {
        height: 64,
        width: 64,
        seed,
        cloud_cover: (0..5)
            .map(|k| {
                if k == 2 {
                    rng.gen_range(0.1..0.6)
                } else {
                    rng.gen_range(0.0..0.09)
                }
            })
            .collect(),
        ..Default::default()
    }
}

fn c3_fusion_identity() -> Verdict {
    let (s, t) = (SpatialParams::default(), TemporalParams::default());
    let mut worst = 0.0f64;
    let mut degraded = 0;
    for seed in 0..10u64 {
        let synth = synthetic_catalog(&synth_spec(seed)).unwrap();
        for &date in &synth.catalog.dates() {
            let run = |m| reconstruct(&synth.catalog, date, m, &s, &t).unwrap();
            let (m1, m2, m3) = (
                run(ReconstructionMode::M1),
                run(ReconstructionMode::M2),
                run(ReconstructionMode::M3),
            );
            degraded += usize::from(m1.references_used.is_empty());
            for i in 0..m1.output.values().len() {
                let blend =
                    (1.0 - m1.theta) * m2.output.values()[i] + m1.theta * m3.output.values()[i];
                worst = worst.max((m1.output.values()[i] - blend).abs());
            }
        }
    }
    verdict(
        worst < 1e-6 && degraded == 0,
        format!("50 scenes, max |M1 - blend| {worst:.2e} K"),
    )
}

fn c4_shift_invariance() -> Verdict {
    let (s, t) = (SpatialParams::default(), TemporalParams::default());
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let synth = synthetic_catalog(&synth_spec(100 + seed)).unwrap();
        let target = synth.catalog.scenes()[2].clone();
        let land = synth.catalog.land().clone();
        let base = temporal_channel(&synth.catalog, &target, &land, &t, &s).unwrap();
        for (which, k) in [(0usize, 4.0), (1, -7.5), (3, 0.125), (4, 25.0)] {
            let scenes: Vec<Scene> = synth
                .catalog
                .scenes()
                .iter()
                .enumerate()
                .map(|(i, sc)| {
                    if i == which {
                        sc.replaced(sc.lst().offset(k).unwrap(), sc.mask().clone())
                            .unwrap()
                    } else {
                        sc.clone()
                    }
                })
                .collect();
            let shifted = SceneCatalog::new(scenes, land.clone(), 16).unwrap();
            let out = temporal_channel(&shifted, &target, &land, &t, &s).unwrap();
            for (a, b) in out.grid.values().iter().zip(base.grid.values()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    verdict(
        worst < 1e-6,
        format!("20 offset runs, max change {worst:.2e} K"),
    )
}

fn c5_synthetic_skill() -> Verdict {
    let (s, t) = (SpatialParams::default(), TemporalParams::default());
    let modes = [
        ReconstructionMode::M1,
        ReconstructionMode::M4,
        ReconstructionMode::M5,
    ];
    let (mut skilful, mut ordered) = (0usize, 0usize);
    let mut m1_rmse = Vec::new();
    let trials = 50u64;
    for seed in 0..trials {
        let spec = SyntheticSpec {
            height: 128,
            width: 128,
            class_separation: 5.0,
            gradient: 2.0,
            noise: 0.5,
            cloud_cover: vec![0.03, 0.06, 0.0, 0.05, 0.02],
            seed: 7000 + seed,
            ..Default::default()
        };
        let synth = synthetic_catalog(&spec).unwrap();
        let target = synth.catalog.dates()[2];
        let occlusion = OcclusionSpec::new(16, 4, seed).unwrap();
        let table = ablation_suite(&synth.catalog, &[target], &occlusion, &modes, &s, &t).unwrap();
        if !table.failures.is_empty() {
            return Verdict::Fail(format!("trial {seed}: {:?}", table.failures));
        }
        let rmse = |m| {
            table
                .rows
                .iter()
                .find(|r| r.mode == m)
                .unwrap()
                .metrics
                .rmse
        };
        let (m1, m4, m5) = (
            rmse(ReconstructionMode::M1),
            rmse(ReconstructionMode::M4),
            rmse(ReconstructionMode::M5),
        );
        skilful += usize::from(m1 < 1.5 && m1 < m5);
        ordered += usize::from(m1 < m4 && m4 < m5);
        m1_rmse.push(m1);
    }
    let frac = skilful as f64 / trials as f64;
    let mean = m1_rmse.iter().sum::<f64>() / m1_rmse.len() as f64;
    let max = m1_rmse.iter().copied().fold(0.0, f64::max);
    verdict(
        frac >= 0.95,
        format!(
            "M1 < 1.5 K and M1 < M5 in {skilful}/{trials}; M1 RMSE mean {mean:.3} max {max:.3} K; \
             M1 < M4 < M5 in {ordered}/{trials} (informational)"
        ),
    )
}

fn c6_insitu_math() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let timestamp = NaiveDate::from_ymd_opt(2022, 7, 1)
        .unwrap()
        .and_hms_opt(15, 0, 0)
        .unwrap();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let skin = rng.gen_range(230.0..345.0);
        let emissivity = rng.gen_range(0.85..1.0);
        let downwelling = rng.gen_range(150.0..500.0);
        let record = StationRecord {
            timestamp,
            upwelling: upwelling_flux(skin, emissivity, downwelling),
            downwelling,
            emissivity,
            latitude: 40.0,
            longitude: -105.0,
        };
        let back = insitu_lst(&record).unwrap();
        worst = worst.max(((back - skin) / skin).abs());
    }
    let ones = broadband_emissivity([1.0; 5]);
    verdict(
        worst <= 1e-9 && ones == 0.999,
        format!("max relative error {worst:.2e}; emissivity(1,1,1,1,1) = {ones}"),
    )
}

fn lstfill(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lstfill"))
        .args(args)
        .output()
        .expect("spawn lstfill")
}

fn c7_determinism(tmp: &Path) -> Verdict {
    let data = tmp.join("data");
    let p = |p: &Path| p.to_str().unwrap().to_owned();
    let out = lstfill(&[
        "synth",
        "--dir",
        &p(&data),
        "--height",
        "96",
        "--width",
        "96",
        "--scenes",
        "6",
        "--cloud-cover",
        "0.05,0.3,0.02,0.5,0.0,0.2",
    ]);
    if !out.status.success() {
        return Verdict::Fail(format!(
            "synth failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let manifest = p(&data.join("manifest.toml"));
    let mut runs = Vec::new();
    for threads in ["1", "8"] {
        let dir = tmp.join(format!("t{threads}"));
        let out = lstfill(&[
            "reconstruct",
            "--manifest",
            &manifest,
            "--all",
            "--provenance",
            "--threads",
            threads,
            "--out",
            &p(&dir),
        ]);
        if !out.status.success() {
            return Verdict::Fail(format!(
                "reconstruct --threads {threads} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let region = dir.join("synthetic");
        let mut files: Vec<_> = std::fs::read_dir(&region)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "tif"))
            .collect();
        files.sort();
        runs.push(
            files
                .iter()
                .map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    let identical = runs[0] == runs[1];
    verdict(
        identical && runs[0].len() == 12,
        format!(
            "{} GeoTIFFs compared, identical: {identical}",
            runs[0].len()
        ),
    )
}

fn c8_serviceability() -> Verdict {
    let shape = GridShape::new(50, 50).unwrap();
    let g = common::georef();
    let land = LandCoverGrid::uniform(shape, g.clone(), 41);
    let d = |m, day| NaiveDate::from_ymd_opt(2022, m, day).unwrap();
    let make = |date, occluded: usize| {
        let lst = LstGrid::from_values(
            shape,
            g.clone(),
            (0..2500).map(|i| 295.0 + (i % 50) as f64 * 0.1).collect(),
        )
        .unwrap();
        let occ = (0..2500).map(|i| (i * 7) % 2500 < occluded).collect();
        Scene::new(
            date,
            lst,
            OcclusionMask::new(shape, g.clone(), occ).unwrap(),
        )
        .unwrap()
    };
    let catalog = SceneCatalog::new(
        vec![
            make(d(7, 1), 0),
            make(d(7, 17), 2450),
            make(d(8, 2), 2475),
            make(d(8, 18), 2490),
        ],
        land,
        16,
    )
    .unwrap();
    let (s, t) = (SpatialParams::default(), TemporalParams::default());
    let ok = reconstruct(&catalog, d(7, 17), ReconstructionMode::M1, &s, &t);
    let complete = matches!(&ok, Ok(r) if r.output.is_complete() && !r.references_used.is_empty());
    let refused = [d(8, 2), d(8, 18)].iter().all(|&date| {
        matches!(
            reconstruct(&catalog, date, ReconstructionMode::M1, &s, &t),
            Err(e @ Error::ServiceabilityExceeded { .. }) if e.to_string().contains("serviceability")
        )
    });
    verdict(
        complete && refused,
        format!("theta 0.98 complete: {complete}; theta 0.99 and 0.996 refused: {refused}"),
    )
}

fn c9_real_catalog() -> Verdict {
    let Some(manifest) = std::env::var_os("LSTFILL_REAL_MANIFEST") else {
        return Verdict::Skip("set LSTFILL_REAL_MANIFEST to a dataset manifest to run".into());
    };
    let out = tempfile::tempdir().unwrap();
    let run = lstfill(&[
        "simulate",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    println!("{}", String::from_utf8_lossy(&run.stdout));
    println!("  reference for M1: MAE 1.25-2.00 K, RMSE 1.65-2.62 K (plausibility only)");
    if run.status.code() == Some(2) {
        Verdict::Fail(String::from_utf8_lossy(&run.stderr).into_owned())
    } else {
        Verdict::Pass("ablation report emitted".into())
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("1 spatial oracle equivalence", Box::new(c1_spatial_oracle)),
        (
            "2 pass-through and convexity",
            Box::new(c2_pass_through_convexity),
        ),
        ("3 fusion identity", Box::new(c3_fusion_identity)),
        ("4 temporal shift invariance", Box::new(c4_shift_invariance)),
        ("5 synthetic end-to-end skill", Box::new(c5_synthetic_skill)),
        ("6 in-situ flux round trip", Box::new(c6_insitu_math)),
        (
            "7 thread-count determinism",
            Box::new(|| c7_determinism(tmp.path())),
        ),
        ("8 serviceability bound", Box::new(c8_serviceability)),
        ("9 real catalog ablation", Box::new(c9_real_catalog)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Verdict::Pass(d) => println!("PASS {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
            Verdict::Skip(d) => println!("SKIP {name}: {d}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
