//! Single-band GeoTIFF reading and writing.
//!
//! Only the subset of GeoTIFF needed for north-up grids is handled:
//! `ModelPixelScale` + `ModelTiepoint` (or a rotation-free
//! `ModelTransformation`), the CRS as an EPSG key or citation string, and
//! the GDAL nodata tag.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use tiff::decoder::{Decoder, DecodingResult, Limits};
use tiff::encoder::colortype::{ColorType, Gray16, Gray32Float, Gray8};
use tiff::encoder::{TiffEncoder, TiffKind};
use tiff::tags::Tag;

use super::{GeoRef, GridShape, LandCoverGrid, LstGrid, QaGrid};
use crate::error::{Error, Result};

const MODEL_TRANSFORMATION: u16 = 34264;

const KEY_MODEL_TYPE: u16 = 1024;
const KEY_RASTER_TYPE: u16 = 1025;
const KEY_CITATION: u16 = 1026;
const KEY_GEOGRAPHIC_TYPE: u16 = 2048;
const KEY_PROJECTED_TYPE: u16 = 3072;

#[derive(Debug, Clone, PartialEq)]
pub enum RasterData {
    U8(Vec<u8>),
    U16(Vec<u16>),
    I16(Vec<i16>),
    U32(Vec<u32>),
    I32(Vec<i32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl RasterData {
    pub fn len(&self) -> usize {
        match self {
            RasterData::U8(v) => v.len(),
            RasterData::U16(v) => v.len(),
            RasterData::I16(v) => v.len(),
            RasterData::U32(v) => v.len(),
            RasterData::I32(v) => v.len(),
            RasterData::F32(v) => v.len(),
            RasterData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_float(&self) -> bool {
        matches!(self, RasterData::F32(_) | RasterData::F64(_))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            RasterData::U8(v) => v.iter().map(|x| *x as f64).collect(),
            RasterData::U16(v) => v.iter().map(|x| *x as f64).collect(),
            RasterData::I16(v) => v.iter().map(|x| *x as f64).collect(),
            RasterData::U32(v) => v.iter().map(|x| *x as f64).collect(),
            RasterData::I32(v) => v.iter().map(|x| *x as f64).collect(),
            RasterData::F32(v) => v.iter().map(|x| *x as f64).collect(),
            RasterData::F64(v) => v.clone(),
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            RasterData::U8(_) => "uint8",
            RasterData::U16(_) => "uint16",
            RasterData::I16(_) => "int16",
            RasterData::U32(_) => "uint32",
            RasterData::I32(_) => "int32",
            RasterData::F32(_) => "float32",
            RasterData::F64(_) => "float64",
        }
    }
}

/// One georeferenced band as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub shape: GridShape,
    pub georef: GeoRef,
    pub nodata: Option<f64>,
    pub data: RasterData,
}

pub trait ToRaster {
    fn to_raster(&self) -> Raster;
}

impl ToRaster for Raster {
    fn to_raster(&self) -> Raster {
        self.clone()
    }
}

impl ToRaster for LstGrid {
    fn to_raster(&self) -> Raster {
        let data = self
            .values()
            .iter()
            .zip(self.valid())
            .map(|(v, ok)| if *ok { *v as f32 } else { LstGrid::FILL as f32 })
            .collect();
        Raster {
            shape: self.shape,
            georef: self.georef.clone(),
            nodata: Some(LstGrid::FILL),
            data: RasterData::F32(data),
        }
    }
}

impl ToRaster for LandCoverGrid {
    fn to_raster(&self) -> Raster {
        Raster {
            shape: self.shape,
            georef: self.georef.clone(),
            nodata: None,
            data: RasterData::U8(self.classes().to_vec()),
        }
    }
}

impl ToRaster for QaGrid {
    fn to_raster(&self) -> Raster {
        Raster {
            shape: self.shape,
            georef: self.georef.clone(),
            nodata: None,
            data: RasterData::U16(self.words().to_vec()),
        }
    }
}

/// Affine conversion from stored digital numbers to kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DnScaling {
    pub scale: f64,
    pub offset: f64,
}

impl DnScaling {
    pub const IDENTITY: DnScaling = DnScaling {
        scale: 1.0,
        offset: 0.0,
    };

    /// Landsat Collection 2 Level-2 surface temperature band (`ST_B10`).
    pub const LANDSAT_C2_ST: DnScaling = DnScaling {
        scale: 0.00341802,
        offset: 149.0,
    };

    pub fn apply(&self, dn: f64) -> f64 {
        dn * self.scale + self.offset
    }
}

fn tiff_err(path: &Path, e: tiff::TiffError) -> Error {
    match e {
        tiff::TiffError::IoError(source) => Error::io(path, source),
        other => Error::Tiff {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads band `band` (0-based) from a GeoTIFF.
///
/// Bands are looked up first among the samples of a pixel-interleaved
/// image, then among the file's image directories.
pub fn read_raster(path: impl AsRef<Path>, band: usize) -> Result<Raster> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = Decoder::new(BufReader::new(file))
        .map_err(|e| tiff_err(path, e))?
        .with_limits(Limits::unlimited());

    let samples = samples_per_pixel(&mut decoder).map_err(|e| tiff_err(path, e))?;
    let (sample, page) = if samples > 1 && band < samples {
        (band, 0)
    } else if samples > 1 {
        return Err(format_err(
            path,
            format!("band {band} requested but image has {samples} samples"),
        ));
    } else {
        (0, band)
    };
    if page > 0 {
        decoder.seek_to_image(page).map_err(|_| {
            format_err(
                path,
                format!("band {band} requested but file has fewer image directories"),
            )
        })?;
    }

    let (width, height) = decoder.dimensions().map_err(|e| tiff_err(path, e))?;
    let shape = GridShape::new(height as usize, width as usize)?;
    let georef = read_georef(&mut decoder, path)?;
    let nodata = decoder
        .find_tag(Tag::GdalNodata)
        .map_err(|e| tiff_err(path, e))?
        .map(|v| v.into_string())
        .transpose()
        .map_err(|e| tiff_err(path, e))?
        .map(|s| {
            let s = s.trim_matches(char::from(0)).trim();
            s.parse::<f64>()
                .map_err(|_| format_err(path, format!("unparseable nodata value {s:?}")))
        })
        .transpose()?;

    let decoded = decoder.read_image().map_err(|e| tiff_err(path, e))?;
    let data = deinterleave(decoded, samples, sample).ok_or_else(|| {
        format_err(
            path,
            "unsupported sample format (expected integer or float samples)",
        )
    })?;
    if data.len() != shape.len() {
        return Err(format_err(
            path,
            format!(
                "decoded {} samples for a {}x{} grid",
                data.len(),
                height,
                width
            ),
        ));
    }
    Ok(Raster {
        shape,
        georef,
        nodata,
        data,
    })
}

fn samples_per_pixel<R: Read + Seek>(decoder: &mut Decoder<R>) -> tiff::TiffResult<usize> {
    Ok(decoder
        .find_tag_unsigned::<u16>(Tag::SamplesPerPixel)?
        .unwrap_or(1) as usize)
}

fn deinterleave(decoded: DecodingResult, samples: usize, sample: usize) -> Option<RasterData> {
    fn pick<T: Copy>(v: Vec<T>, samples: usize, sample: usize) -> Vec<T> {
        if samples == 1 {
            v
        } else {
            v.into_iter().skip(sample).step_by(samples).collect()
        }
    }
    Some(match decoded {
        DecodingResult::U8(v) => RasterData::U8(pick(v, samples, sample)),
        DecodingResult::U16(v) => RasterData::U16(pick(v, samples, sample)),
        DecodingResult::I16(v) => RasterData::I16(pick(v, samples, sample)),
        DecodingResult::U32(v) => RasterData::U32(pick(v, samples, sample)),
        DecodingResult::I32(v) => RasterData::I32(pick(v, samples, sample)),
        DecodingResult::F32(v) => RasterData::F32(pick(v, samples, sample)),
        DecodingResult::F64(v) => RasterData::F64(pick(v, samples, sample)),
        DecodingResult::I8(v) => RasterData::I16(
            pick(v, samples, sample)
                .into_iter()
                .map(i16::from)
                .collect(),
        ),
        _ => return None,
    })
}

fn read_georef<R: Read + Seek>(decoder: &mut Decoder<R>, path: &Path) -> Result<GeoRef> {
    let f64_tag = |decoder: &mut Decoder<R>, tag: Tag| -> Result<Option<Vec<f64>>> {
        decoder
            .find_tag(tag)
            .map_err(|e| tiff_err(path, e))?
            .map(|v| v.into_f64_vec().map_err(|e| tiff_err(path, e)))
            .transpose()
    };

    let scale = f64_tag(decoder, Tag::ModelPixelScaleTag)?;
    let tiepoint = f64_tag(decoder, Tag::ModelTiepointTag)?;
    let transform = f64_tag(decoder, Tag::Unknown(MODEL_TRANSFORMATION))?;

    let (origin, pixel_size) = match (scale, tiepoint, transform) {
        (Some(s), Some(t), _) if s.len() >= 2 && t.len() >= 6 => {
            let (sx, sy) = (s[0], -s[1]);
            ((t[3] - t[0] * sx, t[4] - t[1] * sy), (sx, sy))
        }
        (_, _, Some(m)) if m.len() >= 16 => {
            if m[1] != 0.0 || m[4] != 0.0 {
                return Err(format_err(
                    path,
                    "rotated model transformation is not supported",
                ));
            }
            ((m[3], m[7]), (m[0], m[5]))
        }
        (None, _, None) => {
            return Err(Error::MissingGeoref {
                path: path.to_path_buf(),
                missing: "ModelPixelScale",
            })
        }
        _ => {
            return Err(Error::MissingGeoref {
                path: path.to_path_buf(),
                missing: "ModelTiepoint",
            })
        }
    };

    let keys = decoder
        .find_tag(Tag::GeoKeyDirectoryTag)
        .map_err(|e| tiff_err(path, e))?
        .ok_or(Error::MissingGeoref {
            path: path.to_path_buf(),
            missing: "GeoKeyDirectory",
        })?
        .into_u16_vec()
        .map_err(|e| tiff_err(path, e))?;
    let ascii = decoder
        .find_tag(Tag::GeoAsciiParamsTag)
        .map_err(|e| tiff_err(path, e))?
        .map(|v| v.into_string())
        .transpose()
        .map_err(|e| tiff_err(path, e))?;
    let crs = crs_from_keys(&keys, ascii.as_deref()).ok_or(Error::MissingGeoref {
        path: path.to_path_buf(),
        missing: "coordinate reference system key",
    })?;

    GeoRef::new(origin, pixel_size, crs).map_err(|e| format_err(path, e.to_string()))
}

fn crs_from_keys(keys: &[u16], ascii: Option<&str>) -> Option<String> {
    if keys.len() < 4 {
        return None;
    }
    let count = keys[3] as usize;
    let entries: Vec<&[u16]> = keys[4..].chunks_exact(4).take(count).collect();
    let inline = |id: u16| {
        entries
            .iter()
            .find(|e| e[0] == id && e[1] == 0)
            .map(|e| e[3])
    };
    for id in [KEY_PROJECTED_TYPE, KEY_GEOGRAPHIC_TYPE] {
        if let Some(code) = inline(id) {
            if code != 0 && code != 32767 {
                return Some(format!("EPSG:{code}"));
            }
        }
    }
    let citation = entries
        .iter()
        .find(|e| e[0] == KEY_CITATION && e[1] == Tag::GeoAsciiParamsTag.to_u16())?;
    let ascii = ascii?;
    let start = citation[3] as usize;
    let len = citation[2] as usize;
    let text = ascii.get(start..(start + len).min(ascii.len()))?;
    Some(text.trim_end_matches(['|', '\0']).to_string())
}

fn geokeys(crs: &str) -> (Vec<u16>, String) {
    let citation = format!("{crs}|");
    let mut entries: Vec<[u16; 4]> = Vec::new();
    let epsg = crs
        .strip_prefix("EPSG:")
        .and_then(|c| c.parse::<u16>().ok())
        .filter(|c| *c != 0 && *c != 32767);
    let geographic = matches!(epsg, Some(4000..=4999));
    entries.push([KEY_MODEL_TYPE, 0, 1, if geographic { 2 } else { 1 }]);
    entries.push([KEY_RASTER_TYPE, 0, 1, 1]);
    entries.push([
        KEY_CITATION,
        Tag::GeoAsciiParamsTag.to_u16(),
        citation.len() as u16,
        0,
    ]);
    if let Some(code) = epsg {
        let key = if geographic {
            KEY_GEOGRAPHIC_TYPE
        } else {
            KEY_PROJECTED_TYPE
        };
        entries.push([key, 0, 1, code]);
    }
    let mut dir = vec![1, 1, 0, entries.len() as u16];
    dir.extend(entries.iter().flatten());
    (dir, citation)
}

/// Writes `grid` as a single-band GeoTIFF. Supports uint8, uint16 and
/// float32 sample types.
pub fn write_grid<G: ToRaster + ?Sized>(grid: &G, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raster = grid.to_raster();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    {
        let mut encoder = TiffEncoder::new(&mut writer).map_err(|e| tiff_err(path, e))?;
        let w = raster.shape.width as u32;
        let h = raster.shape.height as u32;
        match &raster.data {
            RasterData::U8(v) => write_band::<_, Gray8, _>(&mut encoder, w, h, v, &raster),
            RasterData::U16(v) => write_band::<_, Gray16, _>(&mut encoder, w, h, v, &raster),
            RasterData::F32(v) => write_band::<_, Gray32Float, _>(&mut encoder, w, h, v, &raster),
            other => {
                return Err(format_err(
                    path,
                    format!("writing {} rasters is not supported", other.type_name()),
                ))
            }
        }
        .map_err(|e| tiff_err(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn write_band<W, C, K>(
    encoder: &mut TiffEncoder<W, K>,
    width: u32,
    height: u32,
    data: &[C::Inner],
    raster: &Raster,
) -> tiff::TiffResult<()>
where
    W: Write + Seek,
    C: ColorType,
    K: TiffKind,
    [C::Inner]: tiff::encoder::TiffValue,
{
    let mut image = encoder.new_image::<C>(width, height)?;
    let g = &raster.georef;
    let dir = image.encoder();
    dir.write_tag(
        Tag::ModelPixelScaleTag,
        &[g.pixel_size.0, -g.pixel_size.1, 0.0][..],
    )?;
    dir.write_tag(
        Tag::ModelTiepointTag,
        &[0.0, 0.0, 0.0, g.origin.0, g.origin.1, 0.0][..],
    )?;
    let (keys, ascii) = geokeys(&g.crs);
    dir.write_tag(Tag::GeoKeyDirectoryTag, &keys[..])?;
    dir.write_tag(Tag::GeoAsciiParamsTag, ascii.as_str())?;
    if let Some(nodata) = raster.nodata {
        dir.write_tag(Tag::GdalNodata, format!("{nodata}").as_str())?;
    }
    image.write_data(data)
}

fn read_lst_values(raster: &Raster, scaling: Option<DnScaling>) -> Vec<f64> {
    let scaling = scaling.unwrap_or(if raster.data.is_float() {
        DnScaling::IDENTITY
    } else {
        DnScaling::LANDSAT_C2_ST
    });
    raster
        .data
        .to_f64()
        .into_iter()
        .map(|raw| {
            if raw.is_nan() || raster.nodata == Some(raw) {
                f64::NAN
            } else {
                scaling.apply(raw)
            }
        })
        .collect()
}

/// Reads a temperature band. Without explicit `scaling`, integer rasters
/// are decoded with [`DnScaling::LANDSAT_C2_ST`] and float rasters are taken
/// as kelvin. Nodata, NaN and physically implausible pixels become invalid.
pub fn read_lst(
    path: impl AsRef<Path>,
    band: usize,
    scaling: Option<DnScaling>,
) -> Result<LstGrid> {
    let raster = read_raster(path, band)?;
    let values = read_lst_values(&raster, scaling);
    LstGrid::from_observations(raster.shape, raster.georef, values)
}

pub fn read_land_cover(path: impl AsRef<Path>, band: usize) -> Result<LandCoverGrid> {
    let path = path.as_ref();
    let raster = read_raster(path, band)?;
    let classes = match raster.data {
        RasterData::U8(v) => v,
        other if !other.is_float() => other
            .to_f64()
            .into_iter()
            .map(|c| {
                u8::try_from(c as i64)
                    .map_err(|_| format_err(path, format!("class code {c} outside 0..=255")))
            })
            .collect::<Result<_>>()?,
        other => {
            return Err(format_err(
                path,
                format!(
                    "land cover must be an integer raster, got {}",
                    other.type_name()
                ),
            ))
        }
    };
    LandCoverGrid::new(raster.shape, raster.georef, classes)
}

pub fn read_qa(path: impl AsRef<Path>, band: usize) -> Result<QaGrid> {
    let path = path.as_ref();
    let raster = read_raster(path, band)?;
    let words = match raster.data {
        RasterData::U16(v) => v,
        RasterData::U8(v) => v.into_iter().map(u16::from).collect(),
        other => {
            return Err(format_err(
                path,
                format!(
                    "quality band must be uint8 or uint16, got {}",
                    other.type_name()
                ),
            ))
        }
    };
    QaGrid::new(raster.shape, raster.georef, words)
}
