use anyhow::Context;
use lstfill_core::raster::write_grid;

use super::{region_dir, stored_reconstructions};
use crate::config::RunConfig;
use crate::error::{invalid, CliResult, Outcome};
use crate::manifest::Dataset;
use crate::HeatdaysArgs;

pub fn run(args: &HeatdaysArgs, config: &RunConfig) -> CliResult<Outcome> {
    if !args.threshold.is_finite() {
        return Err(invalid(format!(
            "threshold must be finite, got {}",
            args.threshold
        )));
    }
    let ds = Dataset::load(&args.manifest, &config.qa, config.theta_denominator)?;
    let grids = stored_reconstructions(&ds, config)?;
    let refs: Vec<_> = grids.iter().map(|(_, g)| g).collect();
    let map = lstfill_core::analytics::heat_days(&refs, args.threshold).map_err(invalid)?;

    let path = match &args.output {
        Some(p) => p.clone(),
        None => region_dir(config, &ds.region)?.join(format!("heatdays_{}K.tif", args.threshold)),
    };
    write_grid(&map, &path).with_context(|| format!("writing {}", path.display()))?;
    let max = map.counts.iter().max().copied().unwrap_or(0);
    println!(
        "{} dates, threshold {} K, max count {max}; written to {}",
        grids.len(),
        args.threshold,
        path.display()
    );
    Outcome::from_counts(ds.catalog.len() - grids.len(), ds.catalog.len())
}
