//! Run configuration: TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use chrono::NaiveTime;
use lstfill_core::eval::{InsituParams, OcclusionSpec};
use lstfill_core::{QaPolicy, ReconstructionMode, SpatialParams, TemporalParams, ThetaDenominator};
use serde::Deserialize;

use crate::error::{invalid, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ReconstructionMode,
    pub output: PathBuf,
    /// Worker threads; `None` uses all available cores.
    pub threads: Option<usize>,
    pub theta_denominator: ThetaDenominator,
    pub spatial: SpatialParams,
    pub temporal: TemporalParams,
    pub qa: QaPolicy,
    pub occlusion: OcclusionConfig,
    pub insitu: InsituConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: ReconstructionMode::M1,
            output: PathBuf::from("out"),
            threads: None,
            theta_denominator: ThetaDenominator::FullGrid,
            spatial: SpatialParams::default(),
            temporal: TemporalParams::default(),
            qa: QaPolicy::default(),
            occlusion: OcclusionConfig::default(),
            insitu: InsituConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcclusionConfig {
    pub size: usize,
    pub count: usize,
    pub seed: u64,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        OcclusionConfig {
            size: 100,
            count: 2,
            seed: 0,
        }
    }
}

impl OcclusionConfig {
    pub fn spec(&self) -> OcclusionSpec {
        OcclusionSpec {
            size: self.size,
            count: self.count,
            seed: self.seed,
        }
    }
}

/// Station matching settings; the reconstruction mode is the run's `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsituConfig {
    pub window_minutes: i64,
    pub footprint: usize,
    pub default_overpass: Option<NaiveTime>,
}

impl Default for InsituConfig {
    fn default() -> Self {
        let p = InsituParams::default();
        InsituConfig {
            window_minutes: p.window_minutes,
            footprint: p.footprint,
            default_overpass: p.default_overpass,
        }
    }
}

impl InsituConfig {
    pub fn params(&self, mode: ReconstructionMode) -> InsituParams {
        InsituParams {
            window_minutes: self.window_minutes,
            footprint: self.footprint,
            default_overpass: self.default_overpass,
            mode,
        }
    }
}

/// Values given on the command line; each one replaces the file setting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<ReconstructionMode>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub window: Option<usize>,
    pub theta_star: Option<f64>,
    pub refs: Option<usize>,
    pub bracket: Option<u32>,
    pub theta_max: Option<f64>,
    pub occlusion_size: Option<usize>,
    pub occlusion_count: Option<usize>,
    pub seed: Option<u64>,
    pub crop_to_valid: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }

    /// Defaults, then the optional file, then overrides; validated.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(o.mode => self.mode);
        set!(o.output => self.output);
        set!(o.window => self.spatial.window);
        set!(o.theta_star => self.spatial.theta_star);
        set!(o.refs => self.temporal.refs);
        set!(o.bracket => self.temporal.bracket);
        set!(o.theta_max => self.temporal.theta_max);
        set!(o.occlusion_size => self.occlusion.size);
        set!(o.occlusion_count => self.occlusion.count);
        set!(o.seed => self.occlusion.seed);
        if o.crop_to_valid {
            self.theta_denominator = ThetaDenominator::ValidOnly;
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.spatial.validate().map_err(invalid)?;
        self.temporal.validate().map_err(invalid)?;
        self.qa.validate().map_err(invalid)?;
        self.occlusion.spec().validate().map_err(invalid)?;
        self.insitu.params(self.mode).validate().map_err(invalid)?;
        if self.threads == Some(0) {
            return Err(invalid("threads must be >= 1"));
        }
        Ok(())
    }

    pub fn thread_pool(&self) -> CliResult<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_library_defaults() {
        let c = RunConfig::resolve(None, &Overrides::default()).unwrap();
        assert_eq!(c.spatial, SpatialParams::default());
        assert_eq!(c.temporal, TemporalParams::default());
        assert_eq!(c.mode, ReconstructionMode::M1);
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "mode = \"m3\"\nthreads = 2\n[spatial]\nwindow = 31\n[temporal]\nrefs = 2\nshift_mode = \"absolute\"\n[occlusion]\nsize = 16\n",
        )
        .unwrap();
        let o = Overrides {
            refs: Some(4),
            seed: Some(9),
            ..Default::default()
        };
        let c = RunConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!(c.mode, ReconstructionMode::M3);
        assert_eq!(c.spatial.window, 31);
        assert_eq!(c.spatial.theta_star, 0.5);
        assert_eq!(c.temporal.refs, 4);
        assert_eq!(c.temporal.shift_mode, lstfill_core::ShiftMode::Absolute);
        assert_eq!(c.occlusion.size, 16);
        assert_eq!(c.occlusion.seed, 9);
        assert_eq!(c.threads, Some(2));
        assert_eq!(c.theta_denominator, ThetaDenominator::FullGrid);
        let c = RunConfig::resolve(
            Some(&path),
            &Overrides {
                crop_to_valid: true,
                ..o
            },
        )
        .unwrap();
        assert_eq!(c.theta_denominator, ThetaDenominator::ValidOnly);
    }

    #[test]
    fn rejects_invalid_values_and_unknown_keys() {
        let o = Overrides {
            theta_star: Some(1.5),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, &o).is_err());
        let o = Overrides {
            window: Some(0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, &o).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[spatial]\nwindw = 3\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), &Overrides::default()).is_err());
    }
}
