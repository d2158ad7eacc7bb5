pub mod catalog;
pub mod heatdays;
pub mod insitu;
pub mod reconstruct;
pub mod series;
pub mod simulate;
pub mod synth;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use lstfill_core::{reconstruct, LstGrid, ReconstructionResult};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::Dataset;

pub(crate) struct Job {
    pub date: NaiveDate,
    pub result: lstfill_core::Result<ReconstructionResult>,
    pub elapsed: Duration,
}

/// Reconstructs `dates` in parallel; results come back in date order.
pub(crate) fn reconstruct_dates(ds: &Dataset, dates: &[NaiveDate], config: &RunConfig) -> Vec<Job> {
    dates
        .par_iter()
        .map(|&date| {
            let start = Instant::now();
            let result = reconstruct(
                &ds.catalog,
                date,
                config.mode,
                &config.spatial,
                &config.temporal,
            );
            Job {
                date,
                result,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

/// Reconstructed grids as they would be stored on disk, skipping dates that
/// could not be reconstructed.
pub(crate) fn stored_reconstructions(
    ds: &Dataset,
    config: &RunConfig,
) -> CliResult<Vec<(NaiveDate, LstGrid)>> {
    let jobs = reconstruct_dates(ds, &ds.catalog.dates(), config);
    let mut out = Vec::with_capacity(jobs.len());
    for job in jobs {
        match job.result {
            Ok(r) => out.push((job.date, r.output.quantized())),
            Err(e) => log::warn!("{}: skipped: {e}", job.date),
        }
    }
    if out.is_empty() {
        return Err(CliError::Failed(anyhow::anyhow!(
            "no scene could be reconstructed"
        )));
    }
    Ok(out)
}

pub(crate) fn region_dir(config: &RunConfig, region: &str) -> CliResult<PathBuf> {
    let dir = config.output.join(region);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Failed(anyhow::anyhow!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}
