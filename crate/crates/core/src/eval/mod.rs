//! Simulated-occlusion scoring, ablation runs and station validation.

mod ablation;
mod insitu;
mod metrics;
mod simulate;

pub use ablation::{ablation_suite, AblationFailure, AblationRow, AblationTable, ModeSummary};
pub use insitu::{
    broadband_emissivity, insitu_lst, insitu_validate, upwelling_flux, InsituPair, InsituParams,
    InsituReport, PartitionStats, SkyCondition, StationPixel, StationRecord, STEFAN_BOLTZMANN,
};
pub use metrics::{score, Metrics};
pub use simulate::{scene_seed, simulate_occlusion, OcclusionSpec, SimulatedOcclusion};
