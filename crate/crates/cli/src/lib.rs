//! Command-line front end for `lstfill-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use chrono::{NaiveDate, NaiveTime};
use clap::{Args, Parser, Subcommand};
use lstfill_core::ReconstructionMode;

use crate::config::{Overrides, RunConfig};
use crate::error::{CliResult, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "lstfill",
    version,
    about = "Cloud-gap filling for land surface temperature rasters"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Reconstruction mode: m1 (full), m2 (spatial), m3 (temporal), m4 (no land cover), m5 (mean)
    #[arg(long, global = true)]
    pub mode: Option<ReconstructionMode>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Spatial window side in pixels (odd)
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Occlusion factor above which class means replace the local filter
    #[arg(long, global = true)]
    pub theta_star: Option<f64>,
    /// Maximum number of temporal reference scenes
    #[arg(long, global = true)]
    pub refs: Option<usize>,
    /// Seasonal bracket half-width, in revisit cycles
    #[arg(long, global = true)]
    pub bracket: Option<u32>,
    /// Reference scenes must have an occlusion factor below this
    #[arg(long, global = true)]
    pub theta_max: Option<f64>,
    /// Side of each simulated occlusion square, pixels
    #[arg(long, global = true)]
    pub occlusion_size: Option<usize>,
    /// Maximum number of simulated occlusion squares per scene
    #[arg(long, global = true)]
    pub occlusion_count: Option<usize>,
    /// Seed for simulated occlusion
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exclude fill pixels from the cloud-fraction denominator
    #[arg(long, global = true)]
    pub crop_to_valid: bool,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode,
            output: self.out.clone(),
            threads: self.threads,
            window: self.window,
            theta_star: self.theta_star,
            refs: self.refs,
            bracket: self.bracket,
            theta_max: self.theta_max,
            occlusion_size: self.occlusion_size,
            occlusion_count: self.occlusion_count,
            seed: self.seed,
            crop_to_valid: self.crop_to_valid,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fill cloud gaps and write one GeoTIFF per date
    Reconstruct(ReconstructArgs),
    /// Score modes on artificially occluded scenes
    Simulate(SimulateArgs),
    /// Compare against ground-station temperatures
    Insitu(InsituArgs),
    /// Per-class mean temperature for every date (CSV)
    Series(SeriesArgs),
    /// Per-pixel count of dates above a temperature threshold (GeoTIFF)
    Heatdays(HeatdaysArgs),
    /// List the scenes of a manifest
    Catalog(CatalogArgs),
    /// Write a synthetic dataset with known truth
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["dates", "all"]))]
pub struct ReconstructArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Date to reconstruct (repeatable)
    #[arg(long = "date")]
    pub dates: Vec<NaiveDate>,
    /// Reconstruct every scene
    #[arg(long)]
    pub all: bool,
    /// Also write a per-pixel provenance raster
    #[arg(long)]
    pub provenance: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Dates to evaluate (default: all)
    #[arg(long = "date")]
    pub dates: Vec<NaiveDate>,
    /// Modes to compare (default: all five)
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<ReconstructionMode>,
}

#[derive(Debug, Args)]
pub struct InsituArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// CSV with columns timestamp, upwelling, downwelling (W/m2)
    #[arg(long)]
    pub records: PathBuf,
    /// Station pixel row
    #[arg(long, requires = "col", conflicts_with_all = ["x", "y"])]
    pub row: Option<usize>,
    /// Station pixel column
    #[arg(long, requires = "row")]
    pub col: Option<usize>,
    /// Station easting in the grid's map coordinates
    #[arg(long, requires = "y")]
    pub x: Option<f64>,
    /// Station northing in the grid's map coordinates
    #[arg(long, requires = "x")]
    pub y: Option<f64>,
    /// Station latitude (recorded only)
    #[arg(long, default_value_t = f64::NAN)]
    pub lat: f64,
    /// Station longitude (recorded only)
    #[arg(long, default_value_t = f64::NAN)]
    pub lon: f64,
    /// Broadband emissivity of the station surface
    #[arg(long, conflicts_with = "aster")]
    pub emissivity: Option<f64>,
    /// ASTER band 10-14 emissivities, comma separated
    #[arg(long, value_delimiter = ',')]
    pub aster: Vec<f64>,
    /// Matching window around the overpass, minutes
    #[arg(long)]
    pub window_minutes: Option<i64>,
    /// Side of the pixel window averaged around the station (odd)
    #[arg(long)]
    pub footprint: Option<usize>,
    /// Overpass time (UTC, HH:MM:SS) for scenes without one
    #[arg(long)]
    pub overpass: Option<NaiveTime>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output CSV (default: <out>/<region>/class_series.csv)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatdaysArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Threshold in kelvin
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Output GeoTIFF (default: <out>/<region>/heatdays_<threshold>K.tif)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Print JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write into
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub height: usize,
    #[arg(long, default_value_t = 128)]
    pub width: usize,
    #[arg(long, default_value_t = 5)]
    pub scenes: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    /// Cloud fraction per scene, comma separated
    #[arg(long, value_delimiter = ',')]
    pub cloud_cover: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub catalog_seed: u64,
    #[arg(long, default_value = "synthetic")]
    pub region: String,
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let config = RunConfig::resolve(cli.global.config.as_deref(), &cli.global.overrides())?;
    let pool = config.thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Reconstruct(a) => commands::reconstruct::run(a, &config),
        Command::Simulate(a) => commands::simulate::run(a, &config),
        Command::Insitu(a) => commands::insitu::run(a, &config),
        Command::Series(a) => commands::series::run(a, &config),
        Command::Heatdays(a) => commands::heatdays::run(a, &config),
        Command::Catalog(a) => commands::catalog::run(a, &config),
        Command::Synth(a) => commands::synth::run(a),
    })
}
