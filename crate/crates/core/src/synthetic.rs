//! Seeded synthetic catalogs with known truth, for tests and demos.
//!
//! Land cover is a Voronoi partition. Each scene's temperature is a class
//! mean plus a smooth spatial pattern plus white noise; scenes differ by a
//! common offset and a small per-class drift. Clouds are random discs whose
//! pixels read cold and carry the cloud QA bit.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::qa::{decode_qa, QaPolicy};
use crate::raster::{GeoRef, GridShape, LandCoverGrid, LstGrid, QaGrid};
use crate::scene::Scene;
use crate::temporal::SceneCatalog;

/// QA word of a clear pixel (Landsat clear bit).
pub const QA_CLEAR: u16 = 1 << 6;
/// QA word of a cloudy pixel (cloud bit).
pub const QA_CLOUD: u16 = 1 << 3;

const CLASS_CODES: [u8; 8] = [21, 22, 23, 24, 41, 52, 71, 82];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub height: usize,
    pub width: usize,
    /// Number of land-cover classes, at most 8 (NLCD codes are used).
    pub classes: usize,
    /// Voronoi cells in the land-cover map.
    pub regions: usize,
    /// Minimum gap between any two class means on every scene, kelvin.
    pub class_separation: f64,
    /// Peak-to-peak amplitude of the smooth spatial pattern, kelvin.
    pub gradient: f64,
    /// Standard deviation of the per-pixel noise, kelvin.
    pub noise: f64,
    pub base: f64,
    /// Scene-wide offsets are drawn from `[-seasonal, seasonal]`.
    pub seasonal: f64,
    /// Per-class offsets are drawn from `[-class_drift, class_drift]`.
    pub class_drift: f64,
    pub scenes: usize,
    pub start: NaiveDate,
    pub cycle_days: u32,
    /// Target cloud fraction per scene; missing entries mean clear.
    pub cloud_cover: Vec<f64>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            height: 128,
            width: 128,
            classes: 4,
            regions: 24,
            class_separation: 5.0,
            gradient: 2.0,
            noise: 0.5,
            base: 295.0,
            seasonal: 3.0,
            class_drift: 0.5,
            scenes: 5,
            start: NaiveDate::from_ymd_opt(2021, 6, 1).expect("valid date"),
            cycle_days: SceneCatalog::LANDSAT_CYCLE_DAYS,
            cloud_cover: Vec::new(),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.classes == 0 || self.classes > CLASS_CODES.len() {
            return bad(format!("classes must be 1..={}", CLASS_CODES.len()));
        }
        if self.regions < self.classes {
            return bad("need at least one region per class".into());
        }
        if self.scenes == 0 || self.cycle_days == 0 {
            return bad("scenes and cycle_days must be >= 1".into());
        }
        if self.cloud_cover.iter().any(|f| !(0.0..1.0).contains(f)) {
            return bad("cloud cover fractions must lie in [0, 1)".into());
        }
        if [
            self.class_separation,
            self.gradient,
            self.noise,
            self.seasonal,
            self.class_drift,
        ]
        .iter()
        .any(|v| !v.is_finite() || *v < 0.0)
        {
            return bad("amplitudes must be finite and non-negative".into());
        }
        GridShape::new(self.height, self.width)?;
        Ok(())
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.scenes)
            .map(|k| self.start + chrono::Days::new(k as u64 * self.cycle_days as u64))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCatalog {
    pub catalog: SceneCatalog,
    /// Cloud-free temperature of every scene, in catalog order.
    pub truth: Vec<LstGrid>,
    /// QA words of every scene, in catalog order.
    pub qa: Vec<QaGrid>,
}

pub fn synthetic_georef() -> GeoRef {
    GeoRef::new((500_000.0, 4_500_000.0), (30.0, -30.0), "EPSG:32618").expect("valid georef")
}

pub fn synthetic_catalog(spec: &SyntheticSpec) -> Result<SyntheticCatalog> {
    spec.validate()?;
    let shape = GridShape::new(spec.height, spec.width)?;
    let georef = synthetic_georef();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let land = voronoi_land(shape, georef.clone(), spec, &mut rng)?;
    let codes: Vec<u8> = CLASS_CODES[..spec.classes].to_vec();
    let mut ranks: Vec<usize> = (0..spec.classes).collect();
    ranks.shuffle(&mut rng);
    // Spacing leaves room for the drift so the separation holds per scene.
    let spacing = spec.class_separation + 2.0 * spec.class_drift;
    let mut class_mean = [0.0f64; 256];
    for (code, rank) in codes.iter().zip(&ranks) {
        class_mean[*code as usize] = spec.base + *rank as f64 * spacing;
    }

    let phase = (
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let pattern: Vec<f64> = (0..shape.len())
        .map(|i| {
            let (r, c) = shape.coords(i);
            let x = std::f64::consts::TAU * c as f64 / spec.width as f64;
            let y = std::f64::consts::TAU * r as f64 / spec.height as f64;
            0.5 * spec.gradient * (x + phase.0).sin() * (y + phase.1).cos()
        })
        .collect();
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let mut scenes = Vec::with_capacity(spec.scenes);
    let mut truths = Vec::with_capacity(spec.scenes);
    let mut qas = Vec::with_capacity(spec.scenes);
    for (k, date) in spec.dates().into_iter().enumerate() {
        let offset = rng.gen_range(-1.0..=1.0) * spec.seasonal;
        let mut drift = [0.0f64; 256];
        for code in &codes {
            drift[*code as usize] = rng.gen_range(-1.0..=1.0) * spec.class_drift;
        }
        let truth: Vec<f64> = (0..shape.len())
            .map(|i| {
                let c = land.classes()[i] as usize;
                class_mean[c] + drift[c] + offset + pattern[i] + noise.sample(&mut rng)
            })
            .collect();
        let cover = spec.cloud_cover.get(k).copied().unwrap_or(0.0);
        let cloudy = cloud_discs(shape, cover, &mut rng);
        let observed: Vec<f64> = truth
            .iter()
            .zip(&cloudy)
            .map(|(t, c)| if *c { t - 20.0 } else { *t })
            .collect();
        let words = cloudy
            .iter()
            .map(|c| if *c { QA_CLOUD } else { QA_CLEAR })
            .collect();
        let qa = QaGrid::new(shape, georef.clone(), words)?;
        let mask = decode_qa(&qa, &QaPolicy::default())?;
        let lst = LstGrid::from_values(shape, georef.clone(), observed)?;
        scenes.push(Scene::new(date, lst, mask)?);
        truths.push(LstGrid::from_values(shape, georef.clone(), truth)?);
        qas.push(qa);
    }
    Ok(SyntheticCatalog {
        catalog: SceneCatalog::new(scenes, land, spec.cycle_days)?,
        truth: truths,
        qa: qas,
    })
}

fn voronoi_land(
    shape: GridShape,
    georef: GeoRef,
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
) -> Result<LandCoverGrid> {
    let seeds: Vec<(f64, f64, u8)> = (0..spec.regions)
        .map(|k| {
            let class = if k < spec.classes {
                CLASS_CODES[k]
            } else {
                CLASS_CODES[rng.gen_range(0..spec.classes)]
            };
            (
                rng.gen_range(0.0..shape.height as f64),
                rng.gen_range(0.0..shape.width as f64),
                class,
            )
        })
        .collect();
    let classes = (0..shape.len())
        .map(|i| {
            let (r, c) = shape.coords(i);
            let (r, c) = (r as f64, c as f64);
            seeds
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - r).powi(2) + (a.1 - c).powi(2);
                    let db = (b.0 - r).powi(2) + (b.1 - c).powi(2);
                    da.total_cmp(&db)
                })
                .map(|s| s.2)
                .expect("at least one region")
        })
        .collect();
    LandCoverGrid::new(shape, georef, classes)
}

/// Random discs until at least `fraction` of the grid is covered.
fn cloud_discs(shape: GridShape, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut cloudy = vec![false; shape.len()];
    let target = (fraction * shape.len() as f64).ceil() as usize;
    let mut covered = 0;
    let side = shape.height.min(shape.width) as f64;
    while covered < target {
        let (cr, cc) = (
            rng.gen_range(0.0..shape.height as f64),
            rng.gen_range(0.0..shape.width as f64),
        );
        let radius = rng.gen_range(side / 16.0..=side / 6.0).max(1.0);
        let r0 = (cr - radius).floor().max(0.0) as usize;
        let r1 = ((cr + radius).ceil() as usize).min(shape.height);
        let c0 = (cc - radius).floor().max(0.0) as usize;
        let c1 = ((cc + radius).ceil() as usize).min(shape.width);
        for r in r0..r1 {
            for c in c0..c1 {
                let i = shape.index(r, c);
                let d2 = (r as f64 + 0.5 - cr).powi(2) + (c as f64 + 0.5 - cc).powi(2);
                if d2 <= radius * radius && !cloudy[i] && covered < target {
                    cloudy[i] = true;
                    covered += 1;
                }
            }
        }
    }
    cloudy
}
