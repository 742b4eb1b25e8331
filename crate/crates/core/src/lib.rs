//! Algorithmic toolkit for single-view sketch to 3D point-cloud
//! reconstruction pipelines: sketch standardization (deform / dilate /
//! refine), point-cloud metrics with verified analytic gradients, viewpoint
//! geometry, synthetic data generation from meshes, and a batch evaluation
//! harness.
//!
//! Modules:
//! - [`sketchimg`]: raster sketches, binarization, morphology, thinning, PGM I/O
//! - [`mlsdeform`]: rigid moving-least-squares deformation and augmentation
//! - [`pointcloud`]: Chamfer distance, exact EMD, rotations, nearest-rotation projection
//! - [`meshsample`]: OBJ meshes, area-weighted surface sampling, viewpoints
//! - [`lossgrad`]: the composite training objective and its gradient checker
//! - [`pipeline`]: the standardization chain and the class-balanced batch sampler
//! - [`eval`]: dataset manifests and the per-category metric table
//! - [`selftest`]: runtime oracle checks behind the CLI's `selftest` command

pub mod error;
pub mod eval;
pub mod lossgrad;
pub mod meshsample;
pub mod mlsdeform;
pub mod pipeline;
pub mod pointcloud;
pub mod selftest;
pub mod sketchimg;

pub use error::{Error, Result};
pub use eval::{EvalManifest, MetricTable};
pub use lossgrad::{LossBreakdown, LossConfig};
pub use meshsample::{TriangleMesh, ViewpointSet};
pub use mlsdeform::{ControlPairSet, DeformField};
pub use pipeline::{BatchPlan, Category, DatasetEntry, Refiner, StandardizeConfig};
pub use pointcloud::{Assignment, PointCloud, RotationMatrix};
pub use sketchimg::{BinaryMask, SketchImage, StructuringElement};
