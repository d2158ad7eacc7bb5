//! Spatial gap filling from clear neighbors of the same land-cover class.
//!
//! Below the switch threshold each gap pixel takes a Gaussian-weighted mean
//! of the clear same-class pixels inside an `f x f` window centred on it.
//! The window sum is evaluated as a per-class normalized convolution: the
//! masked signal and the mask are both convolved with the same truncated
//! kernel and divided. The 2-D Gaussian over a square window factors into
//! two 1-D passes, so a class costs `O(H·W·f)` instead of `O(H·W·f²)`.
//!
//! At or above the threshold every gap pixel takes its class mean over the
//! whole image.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{check_aligned, GridShape, LandCoverGrid, LstGrid};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialParams {
    /// Window side length in pixels; odd.
    pub window: usize,
    /// Occlusion factor at which local filtering gives way to class means.
    pub theta_star: f64,
}

impl Default for SpatialParams {
    fn default() -> Self {
        SpatialParams {
            window: 75,
            theta_star: 0.5,
        }
    }
}

impl SpatialParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.theta_star > 0.0 && self.theta_star <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta_star must lie in (0, 1], got {}",
                self.theta_star
            )));
        }
        Ok(())
    }

    /// Kernel standard deviation, half the window side.
    pub fn sigma(&self) -> f64 {
        self.window as f64 / 2.0
    }

    pub fn radius(&self) -> usize {
        self.window / 2
    }
}

/// Isotropic 2-D Gaussian density at distance `x` (pixels).
pub fn gaussian_weight(x: f64, sigma: f64) -> f64 {
    (1.0 / (2.0 * PI * sigma * sigma)) * (-(x * x) / (2.0 * sigma * sigma)).exp()
}

/// 1-D factor of [`gaussian_weight`]: `k(dx)·k(dy) = G(√(dx²+dy²))`.
/// The `1/(2πσ²)` constant is split evenly over the two passes; it cancels
/// in the normalization but keeps the intermediate sums on the density scale.
fn kernel_1d(radius: usize, sigma: f64) -> Vec<f64> {
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    (0..=radius)
        .map(|d| {
            let d = d as f64;
            norm * (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}

/// Per-class mean over clear pixels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassMeans {
    entries: BTreeMap<u8, ClassStat>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStat {
    pub mean: f64,
    pub count: usize,
}

impl ClassMeans {
    /// Accumulates `values[i]` for every `include[i]` pixel into its class.
    pub fn accumulate(values: &[f64], include: &[bool], classes: &[u8]) -> Self {
        let mut sums = [(0.0f64, 0usize); 256];
        for ((v, inc), c) in values.iter().zip(include).zip(classes) {
            if *inc {
                let s = &mut sums[*c as usize];
                s.0 += v;
                s.1 += 1;
            }
        }
        let entries = sums
            .iter()
            .enumerate()
            .filter(|(_, (_, n))| *n > 0)
            .map(|(c, (sum, n))| {
                (
                    c as u8,
                    ClassStat {
                        mean: sum / *n as f64,
                        count: *n,
                    },
                )
            })
            .collect();
        ClassMeans { entries }
    }

    pub fn get(&self, class: u8) -> Option<f64> {
        self.entries.get(&class).map(|s| s.mean)
    }

    pub fn stat(&self, class: u8) -> Option<ClassStat> {
        self.entries.get(&class).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, ClassStat)> + '_ {
        self.entries.iter().map(|(c, s)| (*c, *s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean of every clear pixel of each class in `scene`.
pub fn class_means(scene: &Scene, land: &LandCoverGrid) -> Result<ClassMeans> {
    check_aligned(&[scene, land])?;
    let clear: Vec<bool> = scene.gaps().iter().map(|g| !g).collect();
    Ok(ClassMeans::accumulate(
        scene.lst().values(),
        &clear,
        land.classes(),
    ))
}

/// How a pixel of a spatial prediction was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialSource {
    Observed,
    /// Gaussian-weighted window average.
    Local,
    /// Whole-image class mean (high-occlusion branch).
    ClassMean,
    /// Empty window; whole-image class mean used instead.
    FallbackClassMean,
    /// No clear pixel of the class anywhere; whole-image clear mean used.
    FallbackGlobalMean,
}

impl SpatialSource {
    pub fn is_fallback(&self) -> bool {
        matches!(
            self,
            SpatialSource::FallbackClassMean | SpatialSource::FallbackGlobalMean
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialPrediction {
    /// Complete grid: observed pixels copied, gaps predicted.
    pub grid: LstGrid,
    pub source: Vec<SpatialSource>,
}

struct Inputs<'a> {
    shape: GridShape,
    values: &'a [f64],
    clear: Vec<bool>,
    classes: &'a [u8],
    means: ClassMeans,
    global_mean: f64,
}

impl<'a> Inputs<'a> {
    fn new(scene: &'a Scene, land: &'a LandCoverGrid) -> Result<Self> {
        check_aligned(&[scene, land])?;
        let clear: Vec<bool> = scene.gaps().iter().map(|g| !g).collect();
        let values = scene.lst().values();
        let (sum, n) = values
            .iter()
            .zip(&clear)
            .filter(|(_, c)| **c)
            .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
        if n == 0 {
            return Err(Error::FullyOccluded);
        }
        Ok(Inputs {
            shape: scene.shape(),
            values,
            means: ClassMeans::accumulate(values, &clear, land.classes()),
            clear,
            classes: land.classes(),
            global_mean: sum / n as f64,
        })
    }

    fn start(&self) -> (Vec<f64>, Vec<SpatialSource>) {
        let source = self
            .clear
            .iter()
            .map(|c| {
                if *c {
                    SpatialSource::Observed
                } else {
                    SpatialSource::Local
                }
            })
            .collect();
        (self.values.to_vec(), source)
    }

    /// Class mean, else global mean, for gap pixel `i`.
    fn fallback(&self, i: usize, class_source: SpatialSource) -> (f64, SpatialSource) {
        match self.means.get(self.classes[i]) {
            Some(m) => (m, class_source),
            None => (self.global_mean, SpatialSource::FallbackGlobalMean),
        }
    }

    fn finish(
        &self,
        values: Vec<f64>,
        source: Vec<SpatialSource>,
        scene: &Scene,
    ) -> Result<SpatialPrediction> {
        let grid = LstGrid::from_values(self.shape, scene.georef().clone(), values)?;
        Ok(SpatialPrediction { grid, source })
    }
}

/// Gaussian-weighted same-class window average at every gap pixel.
///
/// Gap pixels with no clear same-class pixel in their window fall back to
/// the class mean over the whole image, then to the mean of all clear pixels.
pub fn local_filter(
    scene: &Scene,
    land: &LandCoverGrid,
    params: &SpatialParams,
) -> Result<SpatialPrediction> {
    params.validate()?;
    let inputs = Inputs::new(scene, land)?;
    let (mut values, mut source) = inputs.start();

    let radius = params.radius();
    let kernel = kernel_1d(radius, params.sigma());

    let mut targets: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, clear) in inputs.clear.iter().enumerate() {
        if !clear {
            targets.entry(inputs.classes[i]).or_default().push(i);
        }
    }

    for (class, pixels) in &targets {
        let estimates = if inputs.means.get(*class).is_some() {
            class_window_means(&inputs, *class, pixels, radius, &kernel)
        } else {
            vec![None; pixels.len()]
        };
        for (&i, estimate) in pixels.iter().zip(estimates) {
            let (v, s) = match estimate {
                Some(v) => (v, SpatialSource::Local),
                None => inputs.fallback(i, SpatialSource::FallbackClassMean),
            };
            values[i] = v;
            source[i] = s;
        }
    }
    inputs.finish(values, source, scene)
}

/// Normalized convolution restricted to one class, evaluated at `pixels`.
fn class_window_means(
    inputs: &Inputs<'_>,
    class: u8,
    pixels: &[usize],
    radius: usize,
    kernel: &[f64],
) -> Vec<Option<f64>> {
    let GridShape { height, width } = inputs.shape;
    let rows_of = |i: usize| i / width;
    let first = pixels.iter().map(|&i| rows_of(i)).min().unwrap_or(0);
    let last = pixels.iter().map(|&i| rows_of(i)).max().unwrap_or(0);
    let row_lo = first.saturating_sub(radius);
    let row_hi = (last + radius).min(height - 1);

    // Horizontal pass over the rows any target window can touch.
    let band_rows = row_hi - row_lo + 1;
    let mut num = vec![0.0f64; band_rows * width];
    let mut den = vec![0.0f64; band_rows * width];
    num.par_chunks_mut(width)
        .zip(den.par_chunks_mut(width))
        .enumerate()
        .for_each(|(k, (num_row, den_row))| {
            let y = row_lo + k;
            let base = y * width;
            let member = |x: usize| inputs.clear[base + x] && inputs.classes[base + x] == class;
            if !(0..width).any(member) {
                return;
            }
            for x in 0..width {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius).min(width - 1);
                let (mut n, mut d) = (0.0, 0.0);
                for xx in lo..=hi {
                    if member(xx) {
                        let w = kernel[x.abs_diff(xx)];
                        n += w * inputs.values[base + xx];
                        d += w;
                    }
                }
                num_row[x] = n;
                den_row[x] = d;
            }
        });

    // Vertical pass only where an estimate is needed.
    pixels
        .par_iter()
        .map(|&i| {
            let (y, x) = (i / width, i % width);
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(height - 1);
            let (mut n, mut d) = (0.0, 0.0);
            for yy in lo..=hi {
                let w = kernel[y.abs_diff(yy)];
                let j = (yy - row_lo) * width + x;
                n += w * num[j];
                d += w * den[j];
            }
            (d > 0.0).then(|| n / d)
        })
        .collect()
}

/// Whole-image class mean at every gap pixel.
pub fn class_mean_fill(scene: &Scene, land: &LandCoverGrid) -> Result<SpatialPrediction> {
    let inputs = Inputs::new(scene, land)?;
    let (mut values, mut source) = inputs.start();
    for i in 0..values.len() {
        if !inputs.clear[i] {
            let (v, s) = inputs.fallback(i, SpatialSource::ClassMean);
            values[i] = v;
            source[i] = s;
        }
    }
    inputs.finish(values, source, scene)
}

/// Local filtering below `theta_star`, class means at or above it.
pub fn spatial_channel(
    scene: &Scene,
    land: &LandCoverGrid,
    params: &SpatialParams,
) -> Result<SpatialPrediction> {
    params.validate()?;
    if scene.theta() < params.theta_star {
        local_filter(scene, land, params)
    } else {
        class_mean_fill(scene, land)
    }
}
