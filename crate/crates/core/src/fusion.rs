//! Blending of the two channels and full-scene reconstruction.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{check_aligned, Aligned, LandCoverGrid, LstGrid};
use crate::scene::Scene;
use crate::spatial::{spatial_channel, SpatialParams, SpatialPrediction};
use crate::temporal::{temporal_channel, SceneCatalog, TemporalParams, TemporalPrediction};

/// Scenes at or above this occlusion factor are refused.
pub const SERVICEABILITY_BOUND: f64 = 0.99;

/// `(1 - theta) * spatial + theta * temporal`, pixel by pixel.
pub fn fuse(spatial: &LstGrid, temporal: &LstGrid, theta: f64) -> Result<LstGrid> {
    check_aligned(&[spatial, temporal])?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    let w = 1.0 - theta;
    let values = spatial
        .values()
        .iter()
        .zip(temporal.values())
        .map(|(s, t)| w * s + theta * t)
        .collect();
    LstGrid::from_values(spatial.shape(), spatial.georef().clone(), values)
}

/// Full model and its ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconstructionMode {
    /// Spatial and temporal channels fused.
    M1,
    /// Spatial channel only.
    M2,
    /// Temporal channel only.
    M3,
    /// Full model with land cover ignored (a single class everywhere).
    M4,
    /// Gaps filled with the mean of all clear pixels.
    M5,
}

impl ReconstructionMode {
    pub const ALL: [ReconstructionMode; 5] = [
        ReconstructionMode::M1,
        ReconstructionMode::M2,
        ReconstructionMode::M3,
        ReconstructionMode::M4,
        ReconstructionMode::M5,
    ];

    pub fn describe(&self) -> &'static str {
        match self {
            ReconstructionMode::M1 => "full model",
            ReconstructionMode::M2 => "spatial channel only",
            ReconstructionMode::M3 => "temporal channel only",
            ReconstructionMode::M4 => "no land cover",
            ReconstructionMode::M5 => "naive average",
        }
    }
}

impl fmt::Display for ReconstructionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReconstructionMode::M1 => "m1",
            ReconstructionMode::M2 => "m2",
            ReconstructionMode::M3 => "m3",
            ReconstructionMode::M4 => "m4",
            ReconstructionMode::M5 => "m5",
        };
        f.write_str(s)
    }
}

impl FromStr for ReconstructionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReconstructionMode::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mode {s:?}, expected m1..m5")))
    }
}

/// Origin of each output pixel. The discriminants are the values written to
/// provenance rasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum Provenance {
    Observed = 0,
    Spatial = 1,
    Temporal = 2,
    Fused = 3,
    /// A fallback value: empty spatial window, or the naive image mean.
    Fallback = 4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub date: NaiveDate,
    pub output: LstGrid,
    /// Occlusion factor of the target, used as the temporal weight.
    pub theta: f64,
    pub mode: ReconstructionMode,
    pub references_used: Vec<NaiveDate>,
    pub provenance: Vec<Provenance>,
    pub warnings: Vec<String>,
}

impl ReconstructionResult {
    pub fn provenance_codes(&self) -> Vec<u8> {
        self.provenance.iter().map(|p| *p as u8).collect()
    }
}

/// Reconstructs the catalog scene dated `date`.
pub fn reconstruct(
    catalog: &SceneCatalog,
    date: NaiveDate,
    mode: ReconstructionMode,
    spatial: &SpatialParams,
    temporal: &TemporalParams,
) -> Result<ReconstructionResult> {
    let target = catalog.get(date).ok_or(Error::UnknownDate(date))?;
    reconstruct_scene(catalog, target, catalog.land(), mode, spatial, temporal)
}

/// Reconstructs `target`, which need not belong to `catalog` (for instance
/// a copy with simulated occlusion). Catalog scenes on the target's date are
/// never used as references.
pub fn reconstruct_scene(
    catalog: &SceneCatalog,
    target: &Scene,
    land: &LandCoverGrid,
    mode: ReconstructionMode,
    spatial: &SpatialParams,
    temporal: &TemporalParams,
) -> Result<ReconstructionResult> {
    check_aligned(&[target, land])?;
    spatial.validate()?;
    temporal.validate()?;
    let theta = target.theta();
    if theta >= SERVICEABILITY_BOUND {
        return Err(Error::ServiceabilityExceeded {
            theta,
            bound: SERVICEABILITY_BOUND,
        });
    }

    let mut result = ReconstructionResult {
        date: target.date(),
        output: target.lst().clone(),
        theta,
        mode,
        references_used: Vec::new(),
        provenance: Vec::new(),
        warnings: Vec::new(),
    };
    let gaps = target.gaps();

    let (values, gap_provenance): (Vec<f64>, Vec<Provenance>) = match mode {
        ReconstructionMode::M1 => {
            full_model(catalog, target, land, spatial, temporal, &mut result)?
        }
        ReconstructionMode::M4 => {
            let uniform = LandCoverGrid::uniform(land.shape(), land.georef().clone(), 0);
            full_model(catalog, target, &uniform, spatial, temporal, &mut result)?
        }
        ReconstructionMode::M2 => {
            let sp = spatial_channel(target, land, spatial)?;
            note_fallbacks(&sp, &mut result.warnings);
            let prov = spatial_provenance(&sp, Provenance::Spatial);
            (sp.grid.values().to_vec(), prov)
        }
        ReconstructionMode::M3 => {
            let tp = temporal_channel(catalog, target, land, temporal, spatial)?;
            note_shifts(&tp, &mut result.warnings);
            result.references_used = tp.references.clone();
            let n = tp.grid.values().len();
            (tp.grid.values().to_vec(), vec![Provenance::Temporal; n])
        }
        ReconstructionMode::M5 => {
            let mean = clear_mean(target)?;
            let n = gaps.len();
            (vec![mean; n], vec![Provenance::Fallback; n])
        }
    };

    let observed = target.lst().values();
    let mut out = Vec::with_capacity(gaps.len());
    let mut provenance = Vec::with_capacity(gaps.len());
    for i in 0..gaps.len() {
        if gaps[i] {
            out.push(values[i]);
            provenance.push(gap_provenance[i]);
        } else {
            out.push(observed[i]);
            provenance.push(Provenance::Observed);
        }
    }
    result.output = LstGrid::from_values(target.shape(), target.georef().clone(), out)?;
    result.provenance = provenance;
    Ok(result)
}

fn full_model(
    catalog: &SceneCatalog,
    target: &Scene,
    land: &LandCoverGrid,
    spatial: &SpatialParams,
    temporal: &TemporalParams,
    result: &mut ReconstructionResult,
) -> Result<(Vec<f64>, Vec<Provenance>)> {
    let (sp, tp) = rayon::join(
        || spatial_channel(target, land, spatial),
        || temporal_channel(catalog, target, land, temporal, spatial),
    );
    let sp = sp?;
    note_fallbacks(&sp, &mut result.warnings);
    match tp {
        Ok(tp) => {
            note_shifts(&tp, &mut result.warnings);
            result.references_used = tp.references.clone();
            let fused = fuse(&sp.grid, &tp.grid, target.theta())?;
            let prov = spatial_provenance(&sp, Provenance::Fused);
            Ok((fused.values().to_vec(), prov))
        }
        Err(Error::NoReferences(date)) => {
            let msg =
                format!("no admissible reference frames for {date}; using spatial channel only");
            log::warn!("{msg}");
            result.warnings.push(msg);
            let prov = spatial_provenance(&sp, Provenance::Spatial);
            Ok((sp.grid.values().to_vec(), prov))
        }
        Err(e) => Err(e),
    }
}

fn spatial_provenance(sp: &SpatialPrediction, regular: Provenance) -> Vec<Provenance> {
    sp.source
        .iter()
        .map(|s| {
            if s.is_fallback() {
                Provenance::Fallback
            } else {
                regular
            }
        })
        .collect()
}

fn note_fallbacks(sp: &SpatialPrediction, warnings: &mut Vec<String>) {
    let n = sp.source.iter().filter(|s| s.is_fallback()).count();
    if n > 0 {
        warnings.push(format!(
            "{n} pixels had no same-class neighbor in the window and used a fallback mean"
        ));
    }
}

fn note_shifts(tp: &TemporalPrediction, warnings: &mut Vec<String>) {
    for (date, shift) in tp.references.iter().zip(&tp.shifts) {
        let flagged = shift.flagged();
        if !flagged.is_empty() {
            warnings.push(format!(
                "reference {date}: no clear target pixels for classes {flagged:?}; shift set to 0"
            ));
        }
    }
}

fn clear_mean(scene: &Scene) -> Result<f64> {
    let (sum, n) = scene
        .gaps()
        .iter()
        .zip(scene.lst().values())
        .filter(|(g, _)| !**g)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    if n == 0 {
        return Err(Error::FullyOccluded);
    }
    Ok(sum / n as f64)
}
