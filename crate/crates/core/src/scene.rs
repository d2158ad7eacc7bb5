use chrono::{NaiveDate, NaiveTime};

use crate::error::Result;
use crate::qa::{occlusion_factor, occlusion_factor_within, OcclusionMask, ThetaDenominator};
use crate::raster::{check_aligned, Aligned, GeoRef, GridShape, LstGrid};

/// One acquisition: temperature, contamination mask and its occlusion factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    date: NaiveDate,
    time: Option<NaiveTime>,
    lst: LstGrid,
    mask: OcclusionMask,
    theta: f64,
    denominator: ThetaDenominator,
}

impl Scene {
    pub fn new(date: NaiveDate, lst: LstGrid, mask: OcclusionMask) -> Result<Self> {
        Self::with_denominator(date, lst, mask, ThetaDenominator::FullGrid)
    }

    pub fn with_denominator(
        date: NaiveDate,
        lst: LstGrid,
        mask: OcclusionMask,
        denominator: ThetaDenominator,
    ) -> Result<Self> {
        check_aligned(&[&lst, &mask])?;
        let theta = match denominator {
            ThetaDenominator::FullGrid => occlusion_factor(&mask),
            ThetaDenominator::ValidOnly => occlusion_factor_within(&mask, lst.valid()),
        };
        Ok(Scene {
            date,
            time: None,
            lst,
            mask,
            theta,
            denominator,
        })
    }

    /// Attaches the UTC overpass time.
    pub fn at(mut self, time: NaiveTime) -> Self {
        self.time = Some(time);
        self
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn time(&self) -> Option<NaiveTime> {
        self.time
    }

    pub fn lst(&self) -> &LstGrid {
        &self.lst
    }

    pub fn mask(&self) -> &OcclusionMask {
        &self.mask
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn denominator(&self) -> ThetaDenominator {
        self.denominator
    }

    pub fn shape(&self) -> GridShape {
        self.lst.shape()
    }

    pub fn georef(&self) -> &GeoRef {
        self.lst.georef()
    }

    /// Pixels that must be predicted: contaminated or without data.
    pub fn gaps(&self) -> Vec<bool> {
        self.mask
            .occluded()
            .iter()
            .zip(self.lst.valid())
            .map(|(occ, valid)| *occ || !valid)
            .collect()
    }

    /// Rebuilds the scene around replacement data, keeping date, time and
    /// denominator.
    pub fn replaced(&self, lst: LstGrid, mask: OcclusionMask) -> Result<Self> {
        let mut scene = Self::with_denominator(self.date, lst, mask, self.denominator)?;
        scene.time = self.time;
        Ok(scene)
    }
}

impl Aligned for Scene {
    fn shape(&self) -> GridShape {
        self.lst.shape()
    }

    fn georef(&self) -> &GeoRef {
        self.lst.georef()
    }
}
