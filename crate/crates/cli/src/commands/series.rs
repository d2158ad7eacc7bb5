use anyhow::Context;

use super::{region_dir, stored_reconstructions};
use crate::config::RunConfig;
use crate::error::{CliResult, Outcome};
use crate::manifest::Dataset;
use crate::SeriesArgs;

pub fn run(args: &SeriesArgs, config: &RunConfig) -> CliResult<Outcome> {
    let ds = Dataset::load(&args.manifest, &config.qa, config.theta_denominator)?;
    let grids = stored_reconstructions(&ds, config)?;
    let refs: Vec<_> = grids.iter().map(|(d, g)| (*d, g)).collect();
    let rows =
        lstfill_core::analytics::class_series(&refs, ds.catalog.land()).context("class series")?;

    let path = match &args.csv {
        Some(p) => p.clone(),
        None => region_dir(config, &ds.region)?.join("class_series.csv"),
    };
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["date", "class", "name", "mean_k", "pixels"])
        .context("writing csv")?;
    for r in &rows {
        w.write_record([
            r.date.to_string(),
            r.class.to_string(),
            r.name.clone(),
            format!("{:.6}", r.mean),
            r.count.to_string(),
        ])
        .context("writing csv")?;
    }
    w.flush()?;
    println!(
        "{} rows over {} dates written to {}",
        rows.len(),
        grids.len(),
        path.display()
    );
    Outcome::from_counts(ds.catalog.len() - grids.len(), ds.catalog.len())
}
