use std::io::Write;

use anyhow::Context;
use chrono::NaiveDate;
use lstfill_core::raster::{write_grid, Aligned, GridShape, Raster, RasterData};
use lstfill_core::{Error, ReconstructionMode, ReconstructionResult};
use serde::Serialize;

use super::{reconstruct_dates, region_dir};
use crate::config::RunConfig;
use crate::error::{CliResult, Outcome};
use crate::manifest::Dataset;
use crate::ReconstructArgs;

#[derive(Debug, Serialize)]
struct ReportLine {
    date: NaiveDate,
    status: &'static str,
    mode: ReconstructionMode,
    theta: Option<f64>,
    references: Vec<NaiveDate>,
    warnings: Vec<String>,
    output: Option<String>,
    error: Option<String>,
    elapsed_ms: f64,
}

pub fn run(args: &ReconstructArgs, config: &RunConfig) -> CliResult<Outcome> {
    let ds = Dataset::load(&args.manifest, &config.qa, config.theta_denominator)?;
    let dates = ds.select(&args.dates, args.all)?;
    let dir = region_dir(config, &ds.region)?;

    let jobs = reconstruct_dates(&ds, &dates, config);
    let mut lines = Vec::with_capacity(jobs.len());
    let mut failed = 0;
    for job in jobs {
        let elapsed_ms = job.elapsed.as_secs_f64() * 1e3;
        let line = match job.result {
            Ok(r) => {
                let path = dir.join(format!("{}_lst_reconstructed.tif", job.date));
                write_grid(&r.output, &path)
                    .with_context(|| format!("writing {}", path.display()))?;
                if args.provenance {
                    let p = dir.join(format!("{}_provenance.tif", job.date));
                    write_grid(&provenance_raster(&r), &p)
                        .with_context(|| format!("writing {}", p.display()))?;
                }
                for w in &r.warnings {
                    log::warn!("{}: {w}", job.date);
                }
                log::info!(
                    "{}: theta {:.4}, {} references",
                    job.date,
                    r.theta,
                    r.references_used.len()
                );
                ReportLine {
                    date: job.date,
                    status: "ok",
                    mode: r.mode,
                    theta: Some(r.theta),
                    references: r.references_used,
                    warnings: r.warnings,
                    output: Some(path.display().to_string()),
                    error: None,
                    elapsed_ms,
                }
            }
            Err(e) => {
                failed += 1;
                let status = match e {
                    Error::ServiceabilityExceeded { .. } => "skipped",
                    _ => "failed",
                };
                log::error!("{}: {status}: {e}", job.date);
                ReportLine {
                    date: job.date,
                    status,
                    mode: config.mode,
                    theta: ds.catalog.get(job.date).map(|s| s.theta()),
                    references: Vec::new(),
                    warnings: Vec::new(),
                    output: None,
                    error: Some(e.to_string()),
                    elapsed_ms,
                }
            }
        };
        lines.push(line);
    }

    let report = dir.join("reconstruct_report.jsonl");
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(&report).with_context(|| format!("creating {}", report.display()))?,
    );
    for line in &lines {
        serde_json::to_writer(&mut f, line).context("serializing report")?;
        writeln!(f)?;
    }
    f.flush()?;
    println!(
        "{} of {} dates reconstructed into {}",
        lines.len() - failed,
        lines.len(),
        dir.display()
    );
    Outcome::from_counts(failed, lines.len())
}

fn provenance_raster(r: &ReconstructionResult) -> Raster {
    let shape: GridShape = r.output.shape();
    Raster {
        shape,
        georef: r.output.georef().clone(),
        nodata: None,
        data: RasterData::U8(r.provenance_codes()),
    }
}
