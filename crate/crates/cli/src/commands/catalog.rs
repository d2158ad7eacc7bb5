use chrono::{NaiveDate, NaiveTime};
use lstfill_core::{select_references, Error};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliResult, Outcome};
use crate::manifest::Dataset;
use crate::CatalogArgs;

#[derive(Debug, Serialize)]
struct Entry {
    date: NaiveDate,
    time: Option<NaiveTime>,
    theta: f64,
    valid_pixels: usize,
    /// Dates the temporal channel would use for this scene.
    references: Vec<NaiveDate>,
    /// Whether the occlusion factor allows reconstruction.
    serviceable: bool,
    lst: String,
}

pub fn run(args: &CatalogArgs, config: &RunConfig) -> CliResult<Outcome> {
    let ds = Dataset::load(&args.manifest, &config.qa, config.theta_denominator)?;
    let entries: Vec<Entry> = ds
        .catalog
        .scenes()
        .iter()
        .zip(&ds.entries)
        .map(|(scene, entry)| {
            let references = match select_references(&ds.catalog, scene, &config.temporal) {
                Ok(r) => r.iter().map(|s| s.date()).collect(),
                Err(Error::NoReferences(_)) => Vec::new(),
                Err(e) => {
                    log::warn!("{}: {e}", scene.date());
                    Vec::new()
                }
            };
            Entry {
                date: scene.date(),
                time: scene.time(),
                theta: scene.theta(),
                valid_pixels: scene.lst().valid_count(),
                references,
                serviceable: scene.theta() < lstfill_core::fusion::SERVICEABILITY_BOUND,
                lst: entry.lst.display().to_string(),
            }
        })
        .collect();

    if args.json {
        let doc = serde_json::json!({
            "region": ds.region,
            "revisit_days": ds.catalog.cycle_days(),
            "classes": ds.catalog.land().distinct().iter().map(|c| serde_json::json!({
                "code": c, "name": ds.catalog.land().class_name(*c)
            })).collect::<Vec<_>>(),
            "scenes": entries,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)?
        );
    } else {
        let shape = lstfill_core::raster::Aligned::shape(ds.catalog.land());
        println!(
            "region {}: {} scenes, {}x{} pixels, {} land-cover classes",
            ds.region,
            entries.len(),
            shape.height,
            shape.width,
            ds.catalog.land().distinct().len()
        );
        println!(
            "{:<10}  {:<8}  {:>6}  {:>4}  references",
            "date", "time", "theta", "ok"
        );
        for e in &entries {
            let refs: Vec<String> = e.references.iter().map(|d| d.to_string()).collect();
            println!(
                "{:<10}  {:<8}  {:>6.4}  {:>4}  {}",
                e.date,
                e.time.map_or_else(|| "-".to_string(), |t| t.to_string()),
                e.theta,
                if e.serviceable { "yes" } else { "no" },
                if refs.is_empty() {
                    "-".to_string()
                } else {
                    refs.join(" ")
                }
            );
        }
    }
    Ok(Outcome::Success)
}
