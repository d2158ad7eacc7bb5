use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{score, Metrics};
use super::simulate::{scene_seed, simulate_occlusion, OcclusionSpec};
use crate::error::Result;
use crate::fusion::{reconstruct_scene, ReconstructionMode};
use crate::spatial::SpatialParams;
use crate::temporal::{SceneCatalog, TemporalParams};

/// One simulate-reconstruct-score run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub date: NaiveDate,
    pub mode: ReconstructionMode,
    pub size: usize,
    /// Squares actually placed.
    pub squares: usize,
    pub seed: u64,
    /// Occlusion factor after the artificial squares were added.
    pub theta: f64,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationFailure {
    pub date: NaiveDate,
    /// `None` when the failure happened before any mode ran (simulation).
    pub mode: Option<ReconstructionMode>,
    pub error: String,
}

/// Pixel-pooled statistics for one mode over all scenes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: ReconstructionMode,
    pub scenes: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub spec: OcclusionSpec,
    /// Sorted by `(date, mode)`.
    pub rows: Vec<AblationRow>,
    pub failures: Vec<AblationFailure>,
    pub summary: Vec<ModeSummary>,
}

/// For every target date: occlude, reconstruct with each mode, and score
/// over the artificial pixels. Failures are recorded and the run goes on.
///
/// Each date uses its own placement seed (see [`scene_seed`]), shared by all
/// modes so they are compared on identical pixels.
pub fn ablation_suite(
    catalog: &SceneCatalog,
    targets: &[NaiveDate],
    spec: &OcclusionSpec,
    modes: &[ReconstructionMode],
    spatial: &SpatialParams,
    temporal: &TemporalParams,
) -> Result<AblationTable> {
    spec.validate()?;
    spatial.validate()?;
    temporal.validate()?;

    let per_scene: Vec<(Vec<AblationRow>, Vec<AblationFailure>)> = targets
        .par_iter()
        .map(|&date| run_scene(catalog, date, spec, modes, spatial, temporal))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_scene {
        rows.extend(r);
        failures.extend(f);
    }
    rows.sort_by_key(|r| (r.date, r.mode));
    failures.sort_by_key(|f| (f.date, f.mode));

    let mut by_mode: BTreeMap<ReconstructionMode, Vec<&Metrics>> = BTreeMap::new();
    for r in &rows {
        by_mode.entry(r.mode).or_default().push(&r.metrics);
    }
    let summary = by_mode
        .into_iter()
        .filter_map(|(mode, ms)| {
            Metrics::pooled(ms.iter().copied()).map(|metrics| ModeSummary {
                mode,
                scenes: ms.len(),
                metrics,
            })
        })
        .collect();

    Ok(AblationTable {
        spec: *spec,
        rows,
        failures,
        summary,
    })
}

fn run_scene(
    catalog: &SceneCatalog,
    date: NaiveDate,
    spec: &OcclusionSpec,
    modes: &[ReconstructionMode],
    spatial: &SpatialParams,
    temporal: &TemporalParams,
) -> (Vec<AblationRow>, Vec<AblationFailure>) {
    let fail = |mode, error: String| AblationFailure { date, mode, error };
    let Some(truth) = catalog.get(date) else {
        return (
            Vec::new(),
            vec![fail(
                None,
                format!("scene dated {date} not found in catalog"),
            )],
        );
    };
    let seed = scene_seed(spec.seed, date);
    let sim = match simulate_occlusion(truth, &OcclusionSpec { seed, ..*spec }) {
        Ok(sim) => sim,
        Err(e) => return (Vec::new(), vec![fail(None, e.to_string())]),
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &mode in modes {
        let outcome =
            reconstruct_scene(catalog, &sim.scene, catalog.land(), mode, spatial, temporal)
                .and_then(|r| score(&r.output, truth.lst(), &sim.artificial));
        match outcome {
            Ok(metrics) => rows.push(AblationRow {
                date,
                mode,
                size: spec.size,
                squares: sim.squares.len(),
                seed,
                theta: sim.scene.theta(),
                metrics,
            }),
            Err(e) => failures.push(fail(Some(mode), e.to_string())),
        }
    }
    (rows, failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::OcclusionMask;
    use crate::raster::{GeoRef, GridShape, LandCoverGrid, LstGrid};
    use crate::scene::Scene;

    fn catalog() -> SceneCatalog {
        let shape = GridShape::new(32, 32).unwrap();
        let g = GeoRef::new((0.0, 0.0), (30.0, -30.0), "EPSG:32615").unwrap();
        let land = LandCoverGrid::new(
            shape,
            g.clone(),
            (0..1024)
                .map(|i| if (i % 32) < 16 { 21 } else { 41 })
                .collect(),
        )
        .unwrap();
        let scenes = (0..3)
            .map(|k| {
                let values = (0..1024)
                    .map(|i| 295.0 + k as f64 + if (i % 32) < 16 { 8.0 } else { 0.0 })
                    .collect();
                let lst = LstGrid::from_values(shape, g.clone(), values).unwrap();
                let d = NaiveDate::from_ymd_opt(2020, 7, 1).unwrap() + chrono::Days::new(16 * k);
                Scene::new(d, lst, OcclusionMask::clear(shape, g.clone())).unwrap()
            })
            .collect();
        SceneCatalog::new(scenes, land, 16).unwrap()
    }

    #[test]
    fn rows_per_scene_and_mode() {
        let c = catalog();
        let spec = OcclusionSpec::new(6, 2, 5).unwrap();
        let s = SpatialParams {
            window: 9,
            theta_star: 0.5,
        };
        let t = TemporalParams::default();
        let table =
            ablation_suite(&c, &c.dates(), &spec, &ReconstructionMode::ALL, &s, &t).unwrap();
        assert!(table.failures.is_empty(), "{:?}", table.failures);
        assert_eq!(table.rows.len(), 15);
        assert_eq!(table.summary.len(), 5);
        let m1 = &table.summary[0];
        let m5 = &table.summary[4];
        assert!(m1.metrics.rmse < m5.metrics.rmse);
        let again =
            ablation_suite(&c, &c.dates(), &spec, &ReconstructionMode::ALL, &s, &t).unwrap();
        assert_eq!(table, again);
    }

    #[test]
    fn failures_do_not_stop_the_suite() {
        let c = catalog();
        let missing = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
        let mut dates = c.dates();
        dates.push(missing);
        let spec = OcclusionSpec::new(40, 1, 5).unwrap();
        let s = SpatialParams {
            window: 9,
            theta_star: 0.5,
        };
        let table = ablation_suite(
            &c,
            &dates,
            &spec,
            &[ReconstructionMode::M2],
            &s,
            &TemporalParams::default(),
        )
        .unwrap();
        // 40 px squares do not fit: every scene fails at simulation.
        assert!(table.rows.is_empty());
        assert_eq!(table.failures.len(), 4);
    }
}
