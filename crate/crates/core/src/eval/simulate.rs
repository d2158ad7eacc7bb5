use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qa::OcclusionMask;
use crate::scene::Scene;

/// Artificial occlusion: up to `count` squares of side `size` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcclusionSpec {
    pub size: usize,
    pub count: usize,
    pub seed: u64,
}

impl OcclusionSpec {
    /// Placement attempts per square before giving up on it.
    pub const MAX_RETRIES: usize = 1000;

    pub fn new(size: usize, count: usize, seed: u64) -> Result<Self> {
        let spec = OcclusionSpec { size, count, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.count == 0 {
            return Err(Error::InvalidParameter(format!(
                "occlusion size and count must be >= 1, got {}x{}",
                self.size, self.count
            )));
        }
        Ok(())
    }
}

/// Seed for one scene of a multi-scene run, so that every date gets its own
/// but reproducible placement.
pub fn scene_seed(seed: u64, date: NaiveDate) -> u64 {
    seed.wrapping_add(date.num_days_from_ce() as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedOcclusion {
    /// Input scene with the squares masked and their values set to fill.
    pub scene: Scene,
    /// Only the artificial pixels.
    pub artificial: OcclusionMask,
    /// Upper-left corners `(row, col)` of the placed squares.
    pub squares: Vec<(usize, usize)>,
    /// Square count drawn for this run, before placement failures.
    pub drawn: usize,
}

/// Adds artificial square occlusions that avoid real gaps and each other.
///
/// The number of squares is drawn uniformly from `1..=spec.count`; each one
/// is placed by rejection sampling.
pub fn simulate_occlusion(scene: &Scene, spec: &OcclusionSpec) -> Result<SimulatedOcclusion> {
    spec.validate()?;
    let shape = scene.shape();
    let s = spec.size;
    if s > shape.height || s > shape.width {
        return Err(Error::NoPlacement { size: s });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let drawn = rng.gen_range(1..=spec.count);
    let mut blocked = scene.gaps();
    let mut artificial = vec![false; shape.len()];
    let mut squares = Vec::with_capacity(drawn);

    for _ in 0..drawn {
        for _ in 0..OcclusionSpec::MAX_RETRIES {
            let r0 = rng.gen_range(0..=shape.height - s);
            let c0 = rng.gen_range(0..=shape.width - s);
            let free = (r0..r0 + s).all(|r| {
                let row = shape.index(r, c0);
                !blocked[row..row + s].iter().any(|b| *b)
            });
            if free {
                for r in r0..r0 + s {
                    let row = shape.index(r, c0);
                    blocked[row..row + s].iter_mut().for_each(|b| *b = true);
                    artificial[row..row + s].iter_mut().for_each(|a| *a = true);
                }
                squares.push((r0, c0));
                break;
            }
        }
    }
    if squares.is_empty() {
        return Err(Error::NoPlacement { size: s });
    }
    if squares.len() < drawn {
        log::warn!(
            "{}: placed {} of {} {s}x{s} squares",
            scene.date(),
            squares.len(),
            drawn
        );
    }

    let artificial = OcclusionMask::new(shape, scene.georef().clone(), artificial)?;
    let lst = scene.lst().with_invalid(artificial.occluded())?;
    let mask = scene.mask().union(artificial.occluded())?;
    Ok(SimulatedOcclusion {
        scene: scene.replaced(lst, mask)?,
        artificial,
        squares,
        drawn,
    })
}
