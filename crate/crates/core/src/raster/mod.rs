//! Grid types shared by every stage of the pipeline.
//!
//! All grids are row-major. Two grids are aligned when both their
//! [`GridShape`] and [`GeoRef`] compare equal; nothing is ever resampled.

mod geotiff;

use std::collections::BTreeMap;

pub use geotiff::{
    read_land_cover, read_lst, read_qa, read_raster, write_grid, DnScaling, Raster, RasterData,
    ToRaster,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub height: usize,
    pub width: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidGrid(format!(
                "shape must be at least 1x1, got {height}x{width}"
            )));
        }
        Ok(GridShape { height, width })
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }
}

/// Affine placement of a north-up grid.
///
/// `origin` is the map coordinate of the outer corner of pixel (0, 0);
/// `pixel_size.1` is negative for the usual north-up layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoRef {
    pub origin: (f64, f64),
    pub pixel_size: (f64, f64),
    pub crs: String,
}

impl GeoRef {
    pub fn new(origin: (f64, f64), pixel_size: (f64, f64), crs: impl Into<String>) -> Result<Self> {
        if pixel_size.0 == 0.0
            || pixel_size.1 == 0.0
            || !pixel_size.0.is_finite()
            || !pixel_size.1.is_finite()
        {
            return Err(Error::InvalidGrid(format!(
                "pixel size components must be finite and nonzero, got {pixel_size:?}"
            )));
        }
        if !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite origin {origin:?}")));
        }
        Ok(GeoRef {
            origin,
            pixel_size,
            crs: crs.into(),
        })
    }

    /// Pixel containing the map coordinate `(x, y)`, if it falls inside `shape`.
    pub fn pixel_of(&self, shape: GridShape, x: f64, y: f64) -> Option<(usize, usize)> {
        let col = ((x - self.origin.0) / self.pixel_size.0).floor();
        let row = ((y - self.origin.1) / self.pixel_size.1).floor();
        if col < 0.0 || row < 0.0 || col >= shape.width as f64 || row >= shape.height as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }
}

pub trait Aligned {
    fn shape(&self) -> GridShape;
    fn georef(&self) -> &GeoRef;
}

macro_rules! impl_aligned {
    ($($ty:ty),*) => {$(
        impl Aligned for $ty {
            fn shape(&self) -> GridShape {
                self.shape
            }
            fn georef(&self) -> &GeoRef {
                &self.georef
            }
        }
    )*};
}

impl_aligned!(LstGrid, LandCoverGrid, QaGrid, crate::qa::OcclusionMask);

/// Succeeds iff every grid has the shape and georeferencing of the first one.
pub fn check_aligned(grids: &[&dyn Aligned]) -> Result<()> {
    let Some(first) = grids.first() else {
        return Ok(());
    };
    for (index, grid) in grids.iter().enumerate().skip(1) {
        if grid.shape() != first.shape() {
            return Err(Error::Misaligned {
                index,
                reason: format!(
                    "shape {}x{} vs {}x{}",
                    grid.shape().height,
                    grid.shape().width,
                    first.shape().height,
                    first.shape().width
                ),
            });
        }
        let (a, b) = (grid.georef(), first.georef());
        if a.pixel_size != b.pixel_size {
            return Err(Error::Misaligned {
                index,
                reason: format!("pixel size {:?} vs {:?}", a.pixel_size, b.pixel_size),
            });
        }
        if a.origin != b.origin {
            return Err(Error::Misaligned {
                index,
                reason: format!("origin {:?} vs {:?}", a.origin, b.origin),
            });
        }
        if a.crs != b.crs {
            return Err(Error::Misaligned {
                index,
                reason: format!("crs {:?} vs {:?}", a.crs, b.crs),
            });
        }
    }
    Ok(())
}

fn check_len(shape: GridShape, len: usize, what: &str) -> Result<()> {
    if shape.len() != len {
        return Err(Error::InvalidGrid(format!(
            "{what} has {len} elements, expected {}",
            shape.len()
        )));
    }
    Ok(())
}

/// Surface temperature in kelvin with per-pixel validity.
///
/// Values are held in 64-bit; files store them as 32-bit floats. Invalid
/// pixels always carry [`LstGrid::FILL`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstGrid {
    pub(crate) shape: GridShape,
    pub(crate) georef: GeoRef,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl LstGrid {
    pub const MIN_KELVIN: f64 = 150.0;
    pub const MAX_KELVIN: f64 = 400.0;
    pub const FILL: f64 = 0.0;

    pub fn plausible(value: f64) -> bool {
        value.is_finite() && (Self::MIN_KELVIN..=Self::MAX_KELVIN).contains(&value)
    }

    /// Builds a grid, rejecting valid pixels outside the physical range.
    pub fn new(
        shape: GridShape,
        georef: GeoRef,
        mut values: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        check_len(shape, values.len(), "values")?;
        check_len(shape, valid.len(), "validity")?;
        for (i, (v, ok)) in values.iter_mut().zip(&valid).enumerate() {
            if *ok {
                if !Self::plausible(*v) {
                    let (r, c) = shape.coords(i);
                    return Err(Error::InvalidGrid(format!(
                        "pixel ({r}, {c}) = {v} K outside [{}, {}] K",
                        Self::MIN_KELVIN,
                        Self::MAX_KELVIN
                    )));
                }
            } else {
                *v = Self::FILL;
            }
        }
        Ok(LstGrid {
            shape,
            georef,
            values,
            valid,
        })
    }

    /// Fully valid grid.
    pub fn from_values(shape: GridShape, georef: GeoRef, values: Vec<f64>) -> Result<Self> {
        let valid = vec![true; values.len()];
        Self::new(shape, georef, values, valid)
    }

    /// Treats every implausible value (NaN, fill, out of range) as invalid.
    pub fn from_observations(shape: GridShape, georef: GeoRef, values: Vec<f64>) -> Result<Self> {
        let valid = values.iter().map(|v| Self::plausible(*v)).collect();
        Self::new(shape, georef, values, valid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.shape.index(row, col);
        self.valid[i].then_some(self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn is_complete(&self) -> bool {
        self.valid.iter().all(|v| *v)
    }

    /// Copy with `invalid[i] == true` pixels cleared.
    pub fn with_invalid(&self, invalid: &[bool]) -> Result<Self> {
        check_len(self.shape, invalid.len(), "invalid mask")?;
        let valid = self
            .valid
            .iter()
            .zip(invalid)
            .map(|(v, bad)| *v && !bad)
            .collect();
        Self::new(self.shape, self.georef.clone(), self.values.clone(), valid)
    }

    /// Values rounded through `f32`, i.e. exactly what a written file holds.
    pub fn quantized(&self) -> Self {
        let values = self.values.iter().map(|v| *v as f32 as f64).collect();
        LstGrid {
            shape: self.shape,
            georef: self.georef.clone(),
            values,
            valid: self.valid.clone(),
        }
    }

    /// Same grid with `offset` added to every valid pixel.
    pub fn offset(&self, offset: f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(v, ok)| if *ok { v + offset } else { *v })
            .collect();
        Self::new(self.shape, self.georef.clone(), values, self.valid.clone())
    }
}

/// Categorical land-cover labels aligned with the temperature grids.
#[derive(Debug, Clone, PartialEq)]
pub struct LandCoverGrid {
    pub(crate) shape: GridShape,
    pub(crate) georef: GeoRef,
    classes: Vec<u8>,
    legend: BTreeMap<u8, String>,
}

impl LandCoverGrid {
    pub fn new(shape: GridShape, georef: GeoRef, classes: Vec<u8>) -> Result<Self> {
        check_len(shape, classes.len(), "classes")?;
        Ok(LandCoverGrid {
            shape,
            georef,
            classes,
            legend: BTreeMap::new(),
        })
    }

    /// Every pixel in one class. This is the land-cover input of the
    /// "no land cover" ablation.
    pub fn uniform(shape: GridShape, georef: GeoRef, class: u8) -> Self {
        LandCoverGrid {
            shape,
            georef,
            classes: vec![class; shape.len()],
            legend: BTreeMap::new(),
        }
    }

    pub fn with_legend(mut self, legend: BTreeMap<u8, String>) -> Self {
        self.legend = legend;
        self
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn legend(&self) -> &BTreeMap<u8, String> {
        &self.legend
    }

    /// Sorted distinct class codes present in the grid.
    pub fn distinct(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for c in &self.classes {
            seen[*c as usize] = true;
        }
        (0..=255u8).filter(|c| seen[*c as usize]).collect()
    }

    /// Display name from the legend, then the NLCD table, then the code.
    pub fn class_name(&self, class: u8) -> String {
        self.legend
            .get(&class)
            .cloned()
            .or_else(|| nlcd_name(class).map(str::to_owned))
            .unwrap_or_else(|| format!("class {class}"))
    }
}

pub fn nlcd_name(code: u8) -> Option<&'static str> {
    Some(match code {
        11 => "Open Water",
        12 => "Perennial Ice/Snow",
        21 => "Developed, Open Space",
        22 => "Developed, Low Intensity",
        23 => "Developed, Medium Intensity",
        24 => "Developed, High Intensity",
        31 => "Barren Land",
        41 => "Deciduous Forest",
        42 => "Evergreen Forest",
        43 => "Mixed Forest",
        51 => "Dwarf Scrub",
        52 => "Shrub/Scrub",
        71 => "Grassland/Herbaceous",
        72 => "Sedge/Herbaceous",
        73 => "Lichens",
        74 => "Moss",
        81 => "Pasture/Hay",
        82 => "Cultivated Crops",
        90 => "Woody Wetlands",
        95 => "Emergent Herbaceous Wetlands",
        _ => return None,
    })
}

/// Raw per-pixel quality words (e.g. Landsat `QA_PIXEL`).
#[derive(Debug, Clone, PartialEq)]
pub struct QaGrid {
    pub(crate) shape: GridShape,
    pub(crate) georef: GeoRef,
    words: Vec<u16>,
}

impl QaGrid {
    pub fn new(shape: GridShape, georef: GeoRef, words: Vec<u16>) -> Result<Self> {
        check_len(shape, words.len(), "qa words")?;
        Ok(QaGrid {
            shape,
            georef,
            words,
        })
    }

    pub fn words(&self) -> &[u16] {
        &self.words
    }
}
