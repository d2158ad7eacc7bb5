//! Temporal gap filling from seasonally close, nearly cloud-free scenes.
//!
//! References are picked inside a day-of-year bracket around the target
//! (any year), completed with the spatial channel, shifted per land-cover
//! class so their class means match the target's clear pixels, and averaged.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{check_aligned, Aligned, LandCoverGrid, LstGrid};
use crate::scene::Scene;
use crate::spatial::{spatial_channel, SpatialParams};

/// How the per-class adjustment is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMode {
    /// Mean of `target - reference`; carries the direction of the change.
    #[default]
    Signed,
    /// Mean of `|target - reference|`. Diagnostic only: it always raises
    /// the reference.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalParams {
    /// Maximum number of reference scenes.
    pub refs: usize,
    /// Half-width of the seasonal bracket, in revisit cycles.
    pub bracket: u32,
    /// References must have an occlusion factor strictly below this.
    pub theta_max: f64,
    pub shift_mode: ShiftMode,
}

impl Default for TemporalParams {
    fn default() -> Self {
        TemporalParams {
            refs: 3,
            bracket: 2,
            theta_max: 0.1,
            shift_mode: ShiftMode::Signed,
        }
    }
}

impl TemporalParams {
    pub fn validate(&self) -> Result<()> {
        if self.refs == 0 {
            return Err(Error::InvalidParameter("refs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.theta_max) {
            return Err(Error::InvalidParameter(format!(
                "theta_max must lie in [0, 1), got {}",
                self.theta_max
            )));
        }
        Ok(())
    }
}

/// Scenes over one region, sorted by date, sharing one land-cover grid.
#[derive(Debug, Clone)]
pub struct SceneCatalog {
    scenes: Vec<Scene>,
    land: LandCoverGrid,
    cycle_days: u32,
}

impl SceneCatalog {
    pub const LANDSAT_CYCLE_DAYS: u32 = 16;

    pub fn new(mut scenes: Vec<Scene>, land: LandCoverGrid, cycle_days: u32) -> Result<Self> {
        if cycle_days == 0 {
            return Err(Error::InvalidParameter(
                "revisit cycle must be >= 1 day".into(),
            ));
        }
        scenes.sort_by_key(|s| s.date());
        if let Some(w) = scenes.windows(2).find(|w| w[0].date() == w[1].date()) {
            return Err(Error::DuplicateDate(w[0].date()));
        }
        let mut grids: Vec<&dyn Aligned> = vec![&land];
        grids.extend(scenes.iter().map(|s| s as &dyn Aligned));
        check_aligned(&grids)?;
        Ok(SceneCatalog {
            scenes,
            land,
            cycle_days,
        })
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn land(&self) -> &LandCoverGrid {
        &self.land
    }

    pub fn cycle_days(&self) -> u32 {
        self.cycle_days
    }

    pub fn get(&self, date: NaiveDate) -> Option<&Scene> {
        self.scenes
            .binary_search_by_key(&date, |s| s.date())
            .ok()
            .map(|i| &self.scenes[i])
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.scenes.iter().map(|s| s.date()).collect()
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }
}

/// Day of year with 29 February and 31 December (leap) both mapped to 365.
fn day_of_year(date: NaiveDate) -> u32 {
    date.ordinal().min(365)
}

/// Circular day-of-year distance on a 365-day year.
pub fn seasonal_distance(a: NaiveDate, b: NaiveDate) -> u32 {
    let d = day_of_year(a).abs_diff(day_of_year(b));
    d.min(365 - d)
}

/// Picks up to `params.refs` admissible references for `target`.
///
/// A scene is admissible when it is not the target date, lies within
/// `bracket * cycle_days` days of the target's day of year, and has
/// `theta < theta_max`. Admissible scenes are ranked by absolute calendar
/// distance, earlier date first on ties.
pub fn select_references<'a>(
    catalog: &'a SceneCatalog,
    target: &Scene,
    params: &TemporalParams,
) -> Result<Vec<&'a Scene>> {
    params.validate()?;
    let bracket = params.bracket * catalog.cycle_days;
    let mut candidates: Vec<&Scene> = catalog
        .scenes
        .iter()
        .filter(|s| {
            s.date() != target.date()
                && seasonal_distance(s.date(), target.date()) <= bracket
                && s.theta() < params.theta_max
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoReferences(target.date()));
    }
    candidates.sort_by_key(|s| {
        (
            (s.date() - target.date()).num_days().unsigned_abs(),
            s.date(),
        )
    });
    candidates.truncate(params.refs);
    Ok(candidates)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftEntry {
    pub delta: f64,
    /// Pixels the shift was averaged over; zero means no usable pixel and
    /// a zero shift.
    pub count: usize,
}

/// Per-class additive correction for one reference.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassShift {
    entries: BTreeMap<u8, ShiftEntry>,
}

impl ClassShift {
    pub fn get(&self, class: u8) -> f64 {
        self.entries.get(&class).map_or(0.0, |e| e.delta)
    }

    pub fn entry(&self, class: u8) -> Option<ShiftEntry> {
        self.entries.get(&class).copied()
    }

    /// Classes that had no pixel to estimate a shift from.
    pub fn flagged(&self) -> Vec<u8> {
        self.entries
            .iter()
            .filter(|(_, e)| e.count == 0)
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, ShiftEntry)> + '_ {
        self.entries.iter().map(|(c, e)| (*c, *e))
    }
}

/// Mean difference `target - reference` per class over pixels clear in the
/// target. `reference` is expected to be spatially complete.
pub fn class_shift(
    target: &Scene,
    reference: &LstGrid,
    land: &LandCoverGrid,
    mode: ShiftMode,
) -> Result<ClassShift> {
    check_aligned(&[target, reference, land])?;
    let gaps = target.gaps();
    let mut sums = [(0.0f64, 0usize); 256];
    for i in 0..gaps.len() {
        if gaps[i] || !reference.valid()[i] {
            continue;
        }
        let diff = target.lst().values()[i] - reference.values()[i];
        let s = &mut sums[land.classes()[i] as usize];
        s.0 += match mode {
            ShiftMode::Signed => diff,
            ShiftMode::Absolute => diff.abs(),
        };
        s.1 += 1;
    }
    let entries = land
        .distinct()
        .into_iter()
        .map(|c| {
            let (sum, count) = sums[c as usize];
            let delta = if count == 0 { 0.0 } else { sum / count as f64 };
            (c, ShiftEntry { delta, count })
        })
        .collect();
    Ok(ClassShift { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPrediction {
    /// Complete grid; pixels clear in the target are copied through.
    pub grid: LstGrid,
    pub references: Vec<NaiveDate>,
    pub shifts: Vec<ClassShift>,
}

/// Mean of the class-shifted, spatially completed references.
pub fn temporal_channel(
    catalog: &SceneCatalog,
    target: &Scene,
    land: &LandCoverGrid,
    params: &TemporalParams,
    spatial: &SpatialParams,
) -> Result<TemporalPrediction> {
    check_aligned(&[target, land])?;
    let refs = select_references(catalog, target, params)?;
    let completed = refs
        .par_iter()
        .map(|r| spatial_channel(r, land, spatial).map(|p| p.grid))
        .collect::<Result<Vec<_>>>()?;

    let n = target.shape().len();
    let mut sum = vec![0.0f64; n];
    let mut shifts = Vec::with_capacity(completed.len());
    for grid in &completed {
        let shift = class_shift(target, grid, land, params.shift_mode)?;
        for (i, acc) in sum.iter_mut().enumerate() {
            *acc += grid.values()[i] + shift.get(land.classes()[i]);
        }
        shifts.push(shift);
    }

    let k = completed.len() as f64;
    let gaps = target.gaps();
    let values = (0..n)
        .map(|i| {
            if gaps[i] {
                sum[i] / k
            } else {
                target.lst().values()[i]
            }
        })
        .collect();
    Ok(TemporalPrediction {
        grid: LstGrid::from_values(target.shape(), target.georef().clone(), values)?,
        references: refs.iter().map(|r| r.date()).collect(),
        shifts,
    })
}
