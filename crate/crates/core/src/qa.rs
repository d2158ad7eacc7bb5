//! Quality-bit decoding and the occlusion factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{check_aligned, GeoRef, GridShape, QaGrid, Raster, RasterData, ToRaster};

/// Per-pixel contamination flags (`true` = cloud, shadow or cirrus).
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionMask {
    pub(crate) shape: GridShape,
    pub(crate) georef: GeoRef,
    occluded: Vec<bool>,
}

impl OcclusionMask {
    pub fn new(shape: GridShape, georef: GeoRef, occluded: Vec<bool>) -> Result<Self> {
        if occluded.len() != shape.len() {
            return Err(Error::InvalidGrid(format!(
                "mask has {} elements, expected {}",
                occluded.len(),
                shape.len()
            )));
        }
        Ok(OcclusionMask {
            shape,
            georef,
            occluded,
        })
    }

    pub fn clear(shape: GridShape, georef: GeoRef) -> Self {
        OcclusionMask {
            shape,
            georef,
            occluded: vec![false; shape.len()],
        }
    }

    pub fn occluded(&self) -> &[bool] {
        &self.occluded
    }

    pub fn count(&self) -> usize {
        self.occluded.iter().filter(|o| **o).count()
    }

    /// Pixel-wise OR with `other`.
    pub fn union(&self, other: &[bool]) -> Result<Self> {
        if other.len() != self.occluded.len() {
            return Err(Error::InvalidGrid("mask length mismatch in union".into()));
        }
        let occluded = self
            .occluded
            .iter()
            .zip(other)
            .map(|(a, b)| *a || *b)
            .collect();
        Ok(OcclusionMask {
            shape: self.shape,
            georef: self.georef.clone(),
            occluded,
        })
    }
}

impl ToRaster for OcclusionMask {
    fn to_raster(&self) -> Raster {
        Raster {
            shape: self.shape,
            georef: self.georef.clone(),
            nodata: None,
            data: RasterData::U8(self.occluded.iter().map(|o| u8::from(*o)).collect()),
        }
    }
}

/// Which quality bits mark a pixel as contaminated.
///
/// Defaults follow the Landsat Collection 2 `QA_PIXEL` layout: bit 0 fill,
/// 1 dilated cloud, 2 cirrus, 3 cloud, 4 cloud shadow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaPolicy {
    pub cloud: u8,
    pub cloud_shadow: u8,
    pub cirrus: u8,
    /// Opt-in; `None` leaves dilated-cloud pixels usable.
    pub dilated_cloud: Option<u8>,
    pub fill: u8,
}

impl Default for QaPolicy {
    fn default() -> Self {
        QaPolicy {
            cloud: 3,
            cloud_shadow: 4,
            cirrus: 2,
            dilated_cloud: None,
            fill: 0,
        }
    }
}

impl QaPolicy {
    pub const WORD_BITS: u8 = 16;
    pub const LANDSAT_DILATED_CLOUD: u8 = 1;

    pub fn with_dilated_cloud(mut self) -> Self {
        self.dilated_cloud = Some(Self::LANDSAT_DILATED_CLOUD);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut bits = vec![
            ("cloud", self.cloud),
            ("cloud_shadow", self.cloud_shadow),
            ("cirrus", self.cirrus),
            ("fill", self.fill),
        ];
        if let Some(d) = self.dilated_cloud {
            bits.push(("dilated_cloud", d));
        }
        for (i, (name, bit)) in bits.iter().enumerate() {
            if *bit >= Self::WORD_BITS {
                return Err(Error::InvalidParameter(format!(
                    "qa bit {name} = {bit} is outside a {}-bit word",
                    Self::WORD_BITS
                )));
            }
            if let Some((other, _)) = bits[..i].iter().find(|(_, b)| b == bit) {
                return Err(Error::InvalidParameter(format!(
                    "qa bits {other} and {name} share index {bit}"
                )));
            }
        }
        Ok(())
    }

    pub fn contamination_bits(&self) -> u16 {
        let mut m = (1u16 << self.cloud) | (1 << self.cloud_shadow) | (1 << self.cirrus);
        if let Some(d) = self.dilated_cloud {
            m |= 1 << d;
        }
        m
    }
}

/// Marks every pixel whose quality word has any contamination bit set.
pub fn decode_qa(qa: &QaGrid, policy: &QaPolicy) -> Result<OcclusionMask> {
    policy.validate()?;
    let bits = policy.contamination_bits();
    let occluded = qa.words().iter().map(|w| w & bits != 0).collect();
    OcclusionMask::new(qa.shape, qa.georef.clone(), occluded)
}

/// Decodes against a scene grid, failing if the two are not aligned.
pub fn decode_qa_for(
    qa: &QaGrid,
    scene: &dyn crate::raster::Aligned,
    policy: &QaPolicy,
) -> Result<OcclusionMask> {
    check_aligned(&[scene, qa])?;
    decode_qa(qa, policy)
}

/// Pixels whose fill bit is set.
pub fn decode_fill(qa: &QaGrid, policy: &QaPolicy) -> Vec<bool> {
    let bit = 1u16 << policy.fill;
    qa.words().iter().map(|w| w & bit != 0).collect()
}

/// Denominator used for the occlusion factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaDenominator {
    /// Every pixel of the grid (H·W).
    #[default]
    FullGrid,
    /// Only pixels holding data; occluded pixels are counted among them.
    ValidOnly,
}

/// Fraction of occluded pixels over the whole grid.
pub fn occlusion_factor(mask: &OcclusionMask) -> f64 {
    mask.count() as f64 / mask.shape.len() as f64
}

/// Fraction of occluded pixels among `valid` ones; 1.0 if nothing is valid.
pub fn occlusion_factor_within(mask: &OcclusionMask, valid: &[bool]) -> f64 {
    let (occ, total) = mask
        .occluded
        .iter()
        .zip(valid)
        .filter(|(_, v)| **v)
        .fold((0usize, 0usize), |(o, t), (m, _)| {
            (o + usize::from(*m), t + 1)
        });
    if total == 0 {
        1.0
    } else {
        occ as f64 / total as f64
    }
}
