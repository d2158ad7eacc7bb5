//! Dataset manifest: one region, one land-cover grid, dated scenes.
//!
//! ```toml
//! region = "new-york"
//! land_cover = "nlcd_2021.tif"
//! revisit_days = 16
//!
//! [dn]            # optional; integer LST files default to Landsat C2 scaling
//! scale = 0.00341802
//! offset = 149.0
//!
//! [legend]        # optional class names
//! 21 = "Developed, Open Space"
//!
//! [[scenes]]
//! date = "2021-07-17"
//! lst = "LC08_20210717_ST_B10.TIF"
//! qa = "LC08_20210717_QA_PIXEL.TIF"
//! time = "15:42:10"   # optional UTC overpass time
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveTime};
use lstfill_core::qa::{decode_fill, decode_qa_for};
use lstfill_core::raster::{read_land_cover, read_lst, read_qa, DnScaling};
use lstfill_core::{QaPolicy, Scene, SceneCatalog, ThetaDenominator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub region: String,
    pub land_cover: PathBuf,
    #[serde(default = "default_revisit")]
    pub revisit_days: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dn: Option<DnConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub legend: BTreeMap<String, String>,
    pub scenes: Vec<SceneEntry>,
}

fn default_revisit() -> u32 {
    SceneCatalog::LANDSAT_CYCLE_DAYS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnConfig {
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneEntry {
    pub date: NaiveDate,
    pub lst: PathBuf,
    pub qa: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<NaiveTime>,
}

/// A loaded manifest.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub region: String,
    pub catalog: SceneCatalog,
    pub entries: Vec<SceneEntry>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut manifest: DatasetManifest = toml::from_str(&text)
            .map_err(|e| invalid(format!("manifest {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.resolve_paths(&base);
        manifest.validate()?;
        Ok((manifest, base))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.land_cover);
        for s in &mut self.scenes {
            join(&mut s.lst);
            join(&mut s.qa);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.region.trim().is_empty() || self.region.contains(['/', '\\']) {
            return Err(invalid(format!(
                "region {:?} must be a non-empty name without path separators",
                self.region
            )));
        }
        if self.revisit_days == 0 {
            return Err(invalid("revisit_days must be >= 1"));
        }
        if self.scenes.is_empty() {
            return Err(invalid("manifest lists no scenes"));
        }
        let mut dates: Vec<NaiveDate> = self.scenes.iter().map(|s| s.date).collect();
        dates.sort();
        if let Some(w) = dates.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate scene date {}", w[0])));
        }
        for key in self.legend.keys() {
            key.parse::<u8>()
                .map_err(|_| invalid(format!("legend key {key:?} is not a class code 0-255")))?;
        }
        let files = std::iter::once(&self.land_cover)
            .chain(self.scenes.iter().flat_map(|s| [&s.lst, &s.qa]));
        for f in files {
            if !f.is_file() {
                return Err(invalid(format!(
                    "referenced file {} does not exist",
                    f.display()
                )));
            }
        }
        Ok(())
    }

    /// Reads every grid and builds the catalog. Alignment is checked.
    pub fn open(&self, policy: &QaPolicy, denominator: ThetaDenominator) -> CliResult<Dataset> {
        let legend = self
            .legend
            .iter()
            .map(|(k, v)| (k.parse::<u8>().expect("validated"), v.clone()))
            .collect();
        let land = read_land_cover(&self.land_cover, 0)
            .map_err(invalid)?
            .with_legend(legend);
        let scaling = self.dn.map(|d| DnScaling {
            scale: d.scale,
            offset: d.offset,
        });
        let scenes = self
            .scenes
            .par_iter()
            .map(|entry| {
                let lst = read_lst(&entry.lst, 0, scaling)?;
                let qa = read_qa(&entry.qa, 0)?;
                let mask = decode_qa_for(&qa, &lst, policy)?;
                let lst = lst.with_invalid(&decode_fill(&qa, policy))?;
                let scene = Scene::with_denominator(entry.date, lst, mask, denominator)?;
                Ok(match entry.time {
                    Some(t) => scene.at(t),
                    None => scene,
                })
            })
            .collect::<lstfill_core::Result<Vec<_>>>()
            .map_err(invalid)?;
        let catalog = SceneCatalog::new(scenes, land, self.revisit_days).map_err(invalid)?;
        let mut entries = self.scenes.clone();
        entries.sort_by_key(|e| e.date);
        Ok(Dataset {
            region: self.region.clone(),
            catalog,
            entries,
        })
    }
}

impl Dataset {
    pub fn load(path: &Path, policy: &QaPolicy, denominator: ThetaDenominator) -> CliResult<Self> {
        let (manifest, _) = DatasetManifest::load(path)?;
        manifest.open(policy, denominator)
    }

    /// Requested dates, or every date; unknown dates are an input error that
    /// lists what is available.
    pub fn select(&self, dates: &[NaiveDate], all: bool) -> CliResult<Vec<NaiveDate>> {
        if all || dates.is_empty() {
            return Ok(self.catalog.dates());
        }
        for d in dates {
            if self.catalog.get(*d).is_none() {
                let available: Vec<String> =
                    self.catalog.dates().iter().map(|d| d.to_string()).collect();
                return Err(invalid(format!(
                    "no scene dated {d}; available dates: {}",
                    available.join(", ")
                )));
            }
        }
        let mut out = dates.to_vec();
        out.sort();
        out.dedup();
        Ok(out)
    }
}
