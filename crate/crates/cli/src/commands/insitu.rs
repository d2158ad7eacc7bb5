use std::path::Path;

use anyhow::Context;
use chrono::{DateTime, NaiveDateTime};
use lstfill_core::eval::{
    broadband_emissivity, insitu_validate, InsituParams, PartitionStats, StationPixel,
    StationRecord,
};
use lstfill_core::raster::Aligned;
use serde::Deserialize;

use super::region_dir;
use crate::config::RunConfig;
use crate::error::{invalid, CliResult, Outcome};
use crate::manifest::Dataset;
use crate::InsituArgs;

#[derive(Debug, Deserialize)]
struct Row {
    timestamp: String,
    upwelling: f64,
    downwelling: f64,
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(s.trim_end_matches('Z'), f).ok())
}

/// Reads `timestamp,upwelling,downwelling` rows (UTC, W/m2).
pub fn read_records(
    path: &Path,
    emissivity: f64,
    lat: f64,
    lon: f64,
) -> CliResult<Vec<StationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| invalid(format!("cannot read records {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| invalid(format!("{} row {}: {e}", path.display(), i + 1)))?;
        let timestamp = parse_timestamp(&row.timestamp).ok_or_else(|| {
            invalid(format!(
                "{} row {}: bad timestamp {:?}",
                path.display(),
                i + 1,
                row.timestamp
            ))
        })?;
        out.push(StationRecord {
            timestamp,
            upwelling: row.upwelling,
            downwelling: row.downwelling,
            emissivity,
            latitude: lat,
            longitude: lon,
        });
    }
    Ok(out)
}

pub fn run(args: &InsituArgs, config: &RunConfig) -> CliResult<Outcome> {
    let emissivity = match (args.emissivity, args.aster.as_slice()) {
        (Some(e), _) => e,
        (None, [a, b, c, d, e]) => broadband_emissivity([*a, *b, *c, *d, *e]),
        _ => {
            return Err(invalid(
                "give --emissivity or five --aster band emissivities",
            ))
        }
    };
    if !(emissivity > 0.0 && emissivity <= 1.0) {
        return Err(invalid(format!("emissivity {emissivity} outside (0, 1]")));
    }
    let mut params: InsituParams = config.insitu.params(config.mode);
    if let Some(w) = args.window_minutes {
        params.window_minutes = w;
    }
    if let Some(f) = args.footprint {
        params.footprint = f;
    }
    if args.overpass.is_some() {
        params.default_overpass = args.overpass;
    }
    params.validate().map_err(invalid)?;

    let ds = Dataset::load(&args.manifest, &config.qa, config.theta_denominator)?;
    let land = ds.catalog.land();
    let pixel = match (args.row, args.col, args.x, args.y) {
        (Some(row), Some(col), _, _) => StationPixel { row, col },
        (_, _, Some(x), Some(y)) => {
            let (row, col) = land
                .georef()
                .pixel_of(land.shape(), x, y)
                .ok_or_else(|| invalid(format!("station ({x}, {y}) lies outside the grid")))?;
            StationPixel { row, col }
        }
        _ => return Err(invalid("give the station as --row/--col or --x/--y")),
    };
    let records = read_records(&args.records, emissivity, args.lat, args.lon)?;
    let report = insitu_validate(
        &ds.catalog,
        &records,
        pixel,
        &params,
        &config.spatial,
        &config.temporal,
    )
    .map_err(invalid)?;

    let dir = region_dir(config, &ds.region)?;
    let pairs_path = dir.join("insitu_pairs.csv");
    let mut w = csv::Writer::from_path(&pairs_path)
        .with_context(|| format!("creating {}", pairs_path.display()))?;
    w.write_record([
        "date",
        "condition",
        "satellite_k",
        "station_k",
        "station_time",
        "offset_s",
        "theta",
    ])
    .context("writing csv")?;
    for p in &report.pairs {
        w.write_record([
            p.date.to_string(),
            format!("{:?}", p.condition).to_lowercase(),
            format!("{:.4}", p.satellite),
            format!("{:.4}", p.station),
            p.station_time.to_string(),
            p.offset_seconds.to_string(),
            format!("{:.6}", p.theta),
        ])
        .context("writing csv")?;
    }
    w.flush()?;
    let summary_path = dir.join("insitu_summary.json");
    let summary = serde_json::json!({
        "station": { "row": pixel.row, "col": pixel.col, "emissivity": emissivity },
        "mode": params.mode,
        "clear": report.clear,
        "cloudy": report.cloudy,
        "skipped": report.skipped.iter().map(|(d, r)| serde_json::json!({"date": d, "reason": r})).collect::<Vec<_>>(),
        "flagged_records": report.flagged_records,
    });
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).context("serializing summary")?,
    )?;

    println!("clear-sky  {}", describe(&report.clear));
    println!("cloudy-sky {}", describe(&report.cloudy));
    if report.flagged_records > 0 {
        println!(
            "{} station records could not be inverted and were skipped",
            report.flagged_records
        );
    }
    Ok(Outcome::Success)
}

fn describe(s: &PartitionStats) -> String {
    match (s.rmse, s.bias) {
        (Some(rmse), Some(bias)) => format!("n={:<4} RMSE {rmse:.2} K  bias {bias:+.2} K", s.count),
        _ => "n=0    (no pairs)".to_string(),
    }
}
