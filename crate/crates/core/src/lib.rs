//! Cloud-gap filling for land surface temperature rasters.
//!
//! A gap pixel is predicted from two channels. The spatial channel averages
//! clear pixels of the same land-cover class, either in a Gaussian window or
//! over the whole scene; the temporal channel borrows seasonally close clear
//! scenes after a per-class offset. The two are blended by the scene's
//! occlusion factor.

pub mod analytics;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod qa;
pub mod raster;
pub mod scene;
pub mod spatial;
pub mod synthetic;
pub mod temporal;

pub use error::{Error, Result};
pub use fusion::{
    fuse, reconstruct, reconstruct_scene, Provenance, ReconstructionMode, ReconstructionResult,
};
pub use qa::{decode_qa, occlusion_factor, OcclusionMask, QaPolicy, ThetaDenominator};
pub use raster::{GeoRef, GridShape, LandCoverGrid, LstGrid, QaGrid};
pub use scene::Scene;
pub use spatial::{spatial_channel, SpatialParams, SpatialPrediction};
pub use temporal::{select_references, temporal_channel, SceneCatalog, ShiftMode, TemporalParams};
