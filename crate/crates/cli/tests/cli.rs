use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lstfill_core::raster::{read_land_cover, read_lst, read_raster};

fn lstfill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lstfill"))
        .args(args)
        .output()
        .expect("spawn lstfill")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, cloud: &str) -> PathBuf {
    let out = lstfill(&[
        "synth",
        "--dir",
        path(dir),
        "--height",
        "40",
        "--width",
        "40",
        "--scenes",
        "5",
        "--classes",
        "3",
        "--cloud-cover",
        cloud,
        "--catalog-seed",
        "9",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    dir.join("manifest.toml")
}

fn dates(dir: &Path) -> Vec<String> {
    let mut d: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            e.unwrap()
                .file_name()
                .to_str()?
                .strip_suffix("_lst.tif")
                .map(String::from)
        })
        .collect();
    d.sort();
    d
}

#[test]
fn reconstruct_all_writes_one_raster_per_scene() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "0.05,0.2,0.1,0,0.3");
    let out = tmp.path().join("out");
    let run = lstfill(&[
        "reconstruct",
        "--manifest",
        path(&manifest),
        "--all",
        "--provenance",
        "--window",
        "15",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let region = out.join("synthetic");
    for d in dates(&tmp.path().join("data")) {
        let grid = read_lst(region.join(format!("{d}_lst_reconstructed.tif")), 0, None).unwrap();
        assert!(grid.is_complete());
        assert!(region.join(format!("{d}_provenance.tif")).exists());
    }
    let report = std::fs::read_to_string(region.join("reconstruct_report.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.lines().all(|l| l.contains("\"status\":\"ok\"")));
}

#[test]
fn unserviceable_scene_is_skipped_with_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "0.05,0.995,0.1");
    let out = tmp.path().join("out");
    let run = lstfill(&[
        "reconstruct",
        "--manifest",
        path(&manifest),
        "--all",
        "--window",
        "15",
        "--out",
        path(&out),
    ]);
    assert_eq!(run.status.code(), Some(1));
    let region = out.join("synthetic");
    let d = dates(&tmp.path().join("data"));
    assert!(!region
        .join(format!("{}_lst_reconstructed.tif", d[1]))
        .exists());
    assert!(region
        .join(format!("{}_lst_reconstructed.tif", d[0]))
        .exists());
    assert!(region
        .join(format!("{}_lst_reconstructed.tif", d[2]))
        .exists());
    let report = std::fs::read_to_string(region.join("reconstruct_report.jsonl")).unwrap();
    let line = report.lines().find(|l| l.contains(&d[1])).unwrap();
    assert!(line.contains("serviceability"), "{line}");
}

#[test]
fn simulation_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "0.05,0.1,0.0,0.05,0.1");
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("out{k}"));
        let run = lstfill(&[
            "simulate",
            "--manifest",
            path(&manifest),
            "--window",
            "15",
            "--occlusion-size",
            "6",
            "--occlusion-count",
            "3",
            "--seed",
            "42",
            "--out",
            path(&out),
        ]);
        assert_eq!(
            run.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&run.stderr)
        );
        csvs.push(
            std::fs::read_to_string(out.join("synthetic/simulation_s6_n3_seed42.csv")).unwrap(),
        );
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0].lines().count(), 1 + 5 * 5);
}

#[test]
fn series_and_heatdays_agree_with_reconstructions() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let manifest = synth(&data, "0.1,0.2,0.1");
    let out = tmp.path().join("out");
    let common = [
        "--manifest",
        path(&manifest),
        "--window",
        "15",
        "--out",
        path(&out),
    ];
    assert!(lstfill(&[&["reconstruct", "--all"][..], &common].concat())
        .status
        .success());
    assert!(lstfill(&[&["series"][..], &common].concat())
        .status
        .success());
    assert!(
        lstfill(&[&["heatdays", "--threshold", "296"][..], &common].concat())
            .status
            .success()
    );

    let region = out.join("synthetic");
    let land = read_land_cover(data.join("land_cover.tif"), 0).unwrap();
    let grids: Vec<_> = dates(&data)
        .iter()
        .map(|d| {
            (
                d.clone(),
                read_lst(region.join(format!("{d}_lst_reconstructed.tif")), 0, None).unwrap(),
            )
        })
        .collect();

    let mut rdr = csv::Reader::from_path(region.join("class_series.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let class: u8 = rec[1].parse().unwrap();
        let mean: f64 = rec[3].parse().unwrap();
        let grid = &grids.iter().find(|(d, _)| d == &rec[0]).unwrap().1;
        let vals: Vec<f64> = grid
            .values()
            .iter()
            .zip(land.classes())
            .filter(|(_, c)| **c == class)
            .map(|(v, _)| *v)
            .collect();
        assert_eq!(rec[4].parse::<usize>().unwrap(), vals.len());
        let expected = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((mean - expected).abs() < 1e-3, "{mean} vs {expected}");
        rows += 1;
    }
    assert_eq!(rows, grids.len() * land.distinct().len());

    let counts = read_raster(region.join("heatdays_296K.tif"), 0)
        .unwrap()
        .data
        .to_f64();
    for (i, n) in counts.iter().enumerate() {
        let expected = grids.iter().filter(|(_, g)| g.values()[i] > 296.0).count();
        assert_eq!(*n as usize, expected);
    }
}

#[test]
fn empty_station_records_exit_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "0.1,0.2");
    let records = tmp.path().join("records.csv");
    std::fs::write(&records, "timestamp,upwelling,downwelling\n").unwrap();
    let run = lstfill(&[
        "insitu",
        "--manifest",
        path(&manifest),
        "--records",
        path(&records),
        "--row",
        "5",
        "--col",
        "5",
        "--emissivity",
        "0.97",
        "--window",
        "15",
        "--out",
        path(&tmp.path().join("out")),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
}

#[test]
fn invalid_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), "0.1,0.2");
    let config = tmp.path().join("bad.toml");
    std::fs::write(&config, "[spatial]\ntheta_star = 2.0\n").unwrap();
    let bad_config = lstfill(&[
        "catalog",
        "--manifest",
        path(&manifest),
        "--config",
        path(&config),
    ]);
    assert_eq!(bad_config.status.code(), Some(2));

    let unknown = lstfill(&[
        "reconstruct",
        "--manifest",
        path(&manifest),
        "--date",
        "1999-01-01",
    ]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("available"));

    let missing = lstfill(&[
        "reconstruct",
        "--manifest",
        path(&tmp.path().join("nope.toml")),
        "--all",
    ]);
    assert_eq!(missing.status.code(), Some(2));
}
