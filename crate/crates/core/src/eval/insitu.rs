use chrono::{NaiveDateTime, NaiveTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{reconstruct_scene, ReconstructionMode};
use crate::raster::{GridShape, LstGrid};
use crate::scene::Scene;
use crate::spatial::SpatialParams;
use crate::temporal::{SceneCatalog, TemporalParams};

/// W m^-2 K^-4 (CODATA 2018).
pub const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

/// Broadband longwave emissivity from the five ASTER TIR band emissivities
/// (bands 10 to 14).
pub fn broadband_emissivity(bands: [f64; 5]) -> f64 {
    let [e10, e11, e12, e13, e14] = bands;
    0.128 + (0.014 * e10 + 0.145 * e11 + 0.241 * e12 + 0.467 * e13 + 0.004 * e14)
}

/// Upwelling longwave flux of a surface at `skin` kelvin: emitted plus
/// reflected downwelling.
pub fn upwelling_flux(skin: f64, emissivity: f64, downwelling: f64) -> f64 {
    emissivity * STEFAN_BOLTZMANN * skin.powi(4) + (1.0 - emissivity) * downwelling
}

/// One flux measurement from a ground station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub timestamp: NaiveDateTime,
    /// W m^-2
    pub upwelling: f64,
    /// W m^-2
    pub downwelling: f64,
    pub emissivity: f64,
    pub latitude: f64,
    pub longitude: f64,
}

impl StationRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.upwelling > 0.0 && self.downwelling > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: fluxes must be positive (up {}, down {})",
                self.timestamp, self.upwelling, self.downwelling
            )));
        }
        if !(self.emissivity > 0.0 && self.emissivity <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: emissivity {} outside (0, 1]",
                self.timestamp, self.emissivity
            )));
        }
        Ok(())
    }
}

/// Skin temperature from a station record by inverting the upwelling flux.
pub fn insitu_lst(record: &StationRecord) -> Result<f64> {
    record.validate()?;
    let eps = record.emissivity;
    let radicand = (record.upwelling - (1.0 - eps) * record.downwelling) / (eps * STEFAN_BOLTZMANN);
    if radicand <= 0.0 {
        return Err(Error::NonPositiveRadicand { radicand });
    }
    Ok(radicand.powf(0.25))
}

/// Grid cell containing the station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationPixel {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsituParams {
    /// Largest allowed gap between overpass and station record.
    pub window_minutes: i64,
    /// Side of the square pixel window averaged around the station; 1 is
    /// the station pixel alone.
    pub footprint: usize,
    /// Overpass time (UTC) for scenes that carry none.
    pub default_overpass: Option<NaiveTime>,
    pub mode: ReconstructionMode,
}

impl Default for InsituParams {
    fn default() -> Self {
        InsituParams {
            window_minutes: 10,
            footprint: 1,
            default_overpass: None,
            mode: ReconstructionMode::M1,
        }
    }
}

impl InsituParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_minutes < 0 {
            return Err(Error::InvalidParameter(
                "matching window must be >= 0 minutes".into(),
            ));
        }
        if self.footprint == 0 || self.footprint.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "footprint must be a positive odd pixel count, got {}",
                self.footprint
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkyCondition {
    Clear,
    Cloudy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsituPair {
    pub date: chrono::NaiveDate,
    pub condition: SkyCondition,
    /// Observed temperature (clear) or reconstruction (cloudy), kelvin.
    pub satellite: f64,
    pub station: f64,
    pub station_time: NaiveDateTime,
    pub offset_seconds: i64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionStats {
    pub count: usize,
    /// `None` for an empty partition.
    pub rmse: Option<f64>,
    /// Mean of `satellite - station`.
    pub bias: Option<f64>,
}

impl PartitionStats {
    fn of<'a>(pairs: impl Iterator<Item = &'a InsituPair>) -> Self {
        let (mut sq, mut sum, mut n) = (0.0, 0.0, 0usize);
        for p in pairs {
            let e = p.satellite - p.station;
            sq += e * e;
            sum += e;
            n += 1;
        }
        let k = n as f64;
        PartitionStats {
            count: n,
            rmse: (n > 0).then(|| (sq / k).sqrt()),
            bias: (n > 0).then(|| sum / k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsituReport {
    pub pairs: Vec<InsituPair>,
    pub clear: PartitionStats,
    pub cloudy: PartitionStats,
    /// Scenes without a pair, with the reason.
    pub skipped: Vec<(chrono::NaiveDate, String)>,
    /// Station records that could not be inverted to a temperature.
    pub flagged_records: usize,
}

/// Pairs each scene's value at the station with the nearest station
/// temperature and splits the pairs by the scene's cloud flag there.
///
/// Clear pairs compare the raw observation; cloudy pairs compare the
/// reconstruction. Scenes with `theta > 0.99` are left out.
pub fn insitu_validate(
    catalog: &SceneCatalog,
    records: &[StationRecord],
    pixel: StationPixel,
    params: &InsituParams,
    spatial: &SpatialParams,
    temporal: &TemporalParams,
) -> Result<InsituReport> {
    params.validate()?;
    let shape = catalog.land().shape;
    if pixel.row >= shape.height || pixel.col >= shape.width {
        return Err(Error::InvalidParameter(format!(
            "station pixel ({}, {}) outside {}x{} grid",
            pixel.row, pixel.col, shape.height, shape.width
        )));
    }

    let mut station: Vec<(NaiveDateTime, f64)> = Vec::with_capacity(records.len());
    let mut flagged = 0;
    for r in records {
        match insitu_lst(r) {
            Ok(t) => station.push((r.timestamp, t)),
            Err(e) => {
                log::warn!("station record {}: {e}", r.timestamp);
                flagged += 1;
            }
        }
    }
    station.sort_by_key(|(t, _)| *t);

    let outcomes: Vec<std::result::Result<InsituPair, (chrono::NaiveDate, String)>> = catalog
        .scenes()
        .par_iter()
        .map(|scene| {
            pair_scene(catalog, scene, &station, pixel, params, spatial, temporal)
                .map_err(|reason| (scene.date(), reason))
        })
        .collect();

    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(p) => pairs.push(p),
            Err(s) => skipped.push(s),
        }
    }
    let clear = PartitionStats::of(pairs.iter().filter(|p| p.condition == SkyCondition::Clear));
    let cloudy = PartitionStats::of(pairs.iter().filter(|p| p.condition == SkyCondition::Cloudy));
    Ok(InsituReport {
        pairs,
        clear,
        cloudy,
        skipped,
        flagged_records: flagged,
    })
}

fn pair_scene(
    catalog: &SceneCatalog,
    scene: &Scene,
    station: &[(NaiveDateTime, f64)],
    pixel: StationPixel,
    params: &InsituParams,
    spatial: &SpatialParams,
    temporal: &TemporalParams,
) -> std::result::Result<InsituPair, String> {
    if scene.theta() > 0.99 {
        return Err(format!("theta {:.4} above 0.99", scene.theta()));
    }
    let time = scene
        .time()
        .or(params.default_overpass)
        .ok_or("no overpass time for scene")?;
    let overpass = scene.date().and_time(time);
    let (station_time, station_lst) = nearest(station, overpass).ok_or("no station records")?;
    let offset = (station_time - overpass).num_seconds();
    if offset.abs() > params.window_minutes * 60 {
        return Err(format!(
            "nearest station record is {offset} s from overpass"
        ));
    }

    let shape = scene.shape();
    let centre = shape.index(pixel.row, pixel.col);
    let (condition, satellite) = if scene.mask().occluded()[centre] {
        let r = reconstruct_scene(
            catalog,
            scene,
            catalog.land(),
            params.mode,
            spatial,
            temporal,
        )
        .map_err(|e| e.to_string())?;
        (
            SkyCondition::Cloudy,
            footprint_mean(&r.output, None, shape, pixel, params.footprint),
        )
    } else {
        if !scene.lst().valid()[centre] {
            return Err("no valid observation at station pixel".into());
        }
        let gaps = scene.gaps();
        (
            SkyCondition::Clear,
            footprint_mean(scene.lst(), Some(&gaps), shape, pixel, params.footprint),
        )
    };
    Ok(InsituPair {
        date: scene.date(),
        condition,
        satellite: satellite.ok_or("empty footprint")?,
        station: station_lst,
        station_time,
        offset_seconds: offset,
        theta: scene.theta(),
    })
}

fn nearest(station: &[(NaiveDateTime, f64)], at: NaiveDateTime) -> Option<(NaiveDateTime, f64)> {
    let i = station.partition_point(|(t, _)| *t < at);
    let before = i.checked_sub(1).map(|j| station[j]);
    let after = station.get(i).copied();
    match (before, after) {
        (Some(b), Some(a)) => Some(if at - b.0 <= a.0 - at { b } else { a }),
        (b, a) => b.or(a),
    }
}

fn footprint_mean(
    grid: &LstGrid,
    exclude: Option<&[bool]>,
    shape: GridShape,
    pixel: StationPixel,
    k: usize,
) -> Option<f64> {
    let h = k / 2;
    let rows = pixel.row.saturating_sub(h)..(pixel.row + h + 1).min(shape.height);
    let cols = pixel.col.saturating_sub(h)..(pixel.col + h + 1).min(shape.width);
    let (mut sum, mut n) = (0.0, 0usize);
    for r in rows {
        for c in cols.clone() {
            let i = shape.index(r, c);
            if grid.valid()[i] && !exclude.is_some_and(|e| e[i]) {
                sum += grid.values()[i];
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}
