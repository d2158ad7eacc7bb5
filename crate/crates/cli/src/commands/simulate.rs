use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use lstfill_core::eval::{ablation_suite, AblationTable};
use lstfill_core::ReconstructionMode;

use super::region_dir;
use crate::config::RunConfig;
use crate::error::{invalid, CliResult, Outcome};
use crate::manifest::Dataset;
use crate::SimulateArgs;

pub fn run(args: &SimulateArgs, config: &RunConfig) -> CliResult<Outcome> {
    let ds = Dataset::load(&args.manifest, &config.qa, config.theta_denominator)?;
    let dates = ds.select(&args.dates, false)?;
    let modes = if args.modes.is_empty() {
        ReconstructionMode::ALL.to_vec()
    } else {
        let mut m = args.modes.clone();
        m.sort();
        m.dedup();
        m
    };
    let spec = config.occlusion.spec();
    let table = ablation_suite(
        &ds.catalog,
        &dates,
        &spec,
        &modes,
        &config.spatial,
        &config.temporal,
    )
    .map_err(invalid)?;

    let dir = region_dir(config, &ds.region)?;
    let stem = format!(
        "simulation_s{}_n{}_seed{}",
        spec.size, spec.count, spec.seed
    );
    write_rows(&dir.join(format!("{stem}.csv")), &ds.region, &table)?;
    write_summary(&dir.join(format!("{stem}_summary.csv")), &ds.region, &table)?;
    for f in &table.failures {
        let mode = f.mode.map_or_else(|| "-".to_string(), |m| m.to_string());
        log::error!("{} {mode}: {}", f.date, f.error);
    }
    print!("{}", render_table(&ds.region, &table, &modes));

    let attempted = dates.len() * modes.len();
    Outcome::from_counts(attempted - table.rows.len(), attempted)
}

fn write_rows(path: &Path, region: &str, table: &AblationTable) -> CliResult<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "region", "date", "mode", "s", "n", "squares", "seed", "theta", "mae", "rmse", "bias",
        "pixels",
    ])
    .context("writing csv")?;
    for r in &table.rows {
        w.write_record([
            region.to_string(),
            r.date.to_string(),
            r.mode.to_string(),
            r.size.to_string(),
            table.spec.count.to_string(),
            r.squares.to_string(),
            r.seed.to_string(),
            format!("{:.6}", r.theta),
            format!("{:.6}", r.metrics.mae),
            format!("{:.6}", r.metrics.rmse),
            format!("{:.6}", r.metrics.bias),
            r.metrics.count.to_string(),
        ])
        .context("writing csv")?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(path: &Path, region: &str, table: &AblationTable) -> CliResult<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "region", "s", "n", "mode", "scenes", "mae", "rmse", "bias", "pixels",
    ])
    .context("writing csv")?;
    for s in &table.summary {
        w.write_record([
            region.to_string(),
            table.spec.size.to_string(),
            table.spec.count.to_string(),
            s.mode.to_string(),
            s.scenes.to_string(),
            format!("{:.6}", s.metrics.mae),
            format!("{:.6}", s.metrics.rmse),
            format!("{:.6}", s.metrics.bias),
            s.metrics.count.to_string(),
        ])
        .context("writing csv")?;
    }
    w.flush()?;
    Ok(())
}

/// One line per region and occlusion setting: MAE then RMSE for each mode.
pub fn render_table(region: &str, table: &AblationTable, modes: &[ReconstructionMode]) -> String {
    let mut out = String::new();
    let mut header = format!("{:<14} {:>5} {:>3} |", "region", "s", "n");
    for m in modes {
        let _ = write!(
            header,
            " {:>6}",
            format!("MAE {}", m.to_string().to_uppercase())
        );
    }
    header.push_str(" |");
    for m in modes {
        let _ = write!(
            header,
            " {:>7}",
            format!("RMSE {}", m.to_string().to_uppercase())
        );
    }
    let _ = writeln!(out, "{header}");
    let mut line = format!(
        "{:<14} {:>5} {:>3} |",
        region, table.spec.size, table.spec.count
    );
    let cell = |m: &ReconstructionMode, f: fn(&lstfill_core::eval::Metrics) -> f64| {
        table
            .summary
            .iter()
            .find(|s| s.mode == *m)
            .map_or_else(|| "-".to_string(), |s| format!("{:.2}", f(&s.metrics)))
    };
    for m in modes {
        let _ = write!(line, " {:>6}", cell(m, |x| x.mae));
    }
    line.push_str(" |");
    for m in modes {
        let _ = write!(line, " {:>7}", cell(m, |x| x.rmse));
    }
    let _ = writeln!(out, "{line}");
    out
}
