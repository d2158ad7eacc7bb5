//! Products derived from reconstructed grids: class-mean time series and
//! threshold-exceedance counts.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{
    check_aligned, Aligned, GeoRef, GridShape, LandCoverGrid, LstGrid, Raster, RasterData, ToRaster,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub date: NaiveDate,
    pub class: u8,
    pub name: String,
    pub mean: f64,
    pub count: usize,
}

/// Mean temperature per land-cover class for each dated grid, sorted by
/// `(date, class)`. Invalid pixels are ignored; classes without any valid
/// pixel on a date produce no row.
pub fn class_series(
    grids: &[(NaiveDate, &LstGrid)],
    land: &LandCoverGrid,
) -> Result<Vec<SeriesRow>> {
    let mut rows = Vec::new();
    for (date, grid) in grids {
        check_aligned(&[*grid, land])?;
        let mut acc = [(0.0f64, 0usize); 256];
        for ((v, ok), c) in grid.values().iter().zip(grid.valid()).zip(land.classes()) {
            if *ok {
                acc[*c as usize].0 += v;
                acc[*c as usize].1 += 1;
            }
        }
        for (class, (sum, count)) in acc.iter().enumerate() {
            if *count > 0 {
                let class = class as u8;
                rows.push(SeriesRow {
                    date: *date,
                    class,
                    name: land.class_name(class),
                    mean: sum / *count as f64,
                    count: *count,
                });
            }
        }
    }
    rows.sort_by_key(|r| (r.date, r.class));
    Ok(rows)
}

/// Per-pixel number of grids hotter than a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatDayMap {
    pub shape: GridShape,
    pub georef: GeoRef,
    pub threshold: f64,
    pub counts: Vec<u16>,
}

impl ToRaster for HeatDayMap {
    fn to_raster(&self) -> Raster {
        Raster {
            shape: self.shape,
            georef: self.georef.clone(),
            nodata: None,
            data: RasterData::U16(self.counts.clone()),
        }
    }
}

/// Counts, per pixel, the grids whose valid value strictly exceeds
/// `threshold` (kelvin).
pub fn heat_days(grids: &[&LstGrid], threshold: f64) -> Result<HeatDayMap> {
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite, got {threshold}"
        )));
    }
    let first = grids
        .first()
        .ok_or_else(|| Error::InvalidParameter("heat-day count needs at least one grid".into()))?;
    let aligned: Vec<&dyn Aligned> = grids.iter().map(|g| *g as &dyn Aligned).collect();
    check_aligned(&aligned)?;
    if grids.len() > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "at most {} grids per count",
            u16::MAX
        )));
    }
    let mut counts = vec![0u16; first.shape().len()];
    for g in grids {
        for ((n, v), ok) in counts.iter_mut().zip(g.values()).zip(g.valid()) {
            if *ok && *v > threshold {
                *n += 1;
            }
        }
    }
    Ok(HeatDayMap {
        shape: first.shape(),
        georef: first.georef().clone(),
        threshold,
        counts,
    })
}
