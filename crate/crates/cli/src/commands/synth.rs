use std::path::PathBuf;

use anyhow::Context;
use lstfill_core::raster::write_grid;
use lstfill_core::synthetic::{synthetic_catalog, SyntheticSpec};

use crate::error::{invalid, CliResult, Outcome};
use crate::manifest::{DatasetManifest, SceneEntry};
use crate::SynthArgs;

pub fn run(args: &SynthArgs) -> CliResult<Outcome> {
    let spec = SyntheticSpec {
        height: args.height,
        width: args.width,
        scenes: args.scenes,
        classes: args.classes,
        cloud_cover: args.cloud_cover.clone(),
        seed: args.catalog_seed,
        ..Default::default()
    };
    let synth = synthetic_catalog(&spec).map_err(invalid)?;
    std::fs::create_dir_all(&args.dir)
        .with_context(|| format!("creating {}", args.dir.display()))?;

    let write =
        |grid: &dyn Fn(&PathBuf) -> lstfill_core::Result<()>, name: String| -> CliResult<PathBuf> {
            let path = args.dir.join(&name);
            grid(&path).with_context(|| format!("writing {}", path.display()))?;
            Ok(PathBuf::from(name))
        };

    let land = write(
        &|p| write_grid(synth.catalog.land(), p),
        "land_cover.tif".into(),
    )?;
    let mut scenes = Vec::new();
    for ((scene, truth), qa) in synth
        .catalog
        .scenes()
        .iter()
        .zip(&synth.truth)
        .zip(&synth.qa)
    {
        let d = scene.date();
        let lst = write(&|p| write_grid(scene.lst(), p), format!("{d}_lst.tif"))?;
        let qa = write(&|p| write_grid(qa, p), format!("{d}_qa.tif"))?;
        write(&|p| write_grid(truth, p), format!("{d}_truth.tif"))?;
        scenes.push(SceneEntry {
            date: d,
            lst,
            qa,
            time: None,
        });
    }
    let manifest = DatasetManifest {
        region: args.region.clone(),
        land_cover: land,
        revisit_days: spec.cycle_days,
        dn: None,
        legend: Default::default(),
        scenes,
    };
    let path = args.dir.join("manifest.toml");
    let text = toml::to_string_pretty(&manifest).context("serializing manifest")?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{} scenes written; manifest at {}",
        synth.catalog.len(),
        path.display()
    );
    Ok(Outcome::Success)
}
