//! Keypoint-free point cloud registration.
//!
//! The pipeline matches two partially overlapping point clouds in a
//! coarse-to-fine manner: both clouds are voxel-downsampled into dense
//! points and superpoints, superpoints are matched with a geometric
//! transformer (rigid-invariant distance/angle structure embeddings fed
//! into interleaved self/cross attention), superpoint matches are refined
//! to dense point correspondences with an optimal-transport (Sinkhorn)
//! layer, and the alignment is estimated with a RANSAC-free local-to-global
//! scheme built on weighted SVD.
//!
//! Core numerics are generic over the scalar type (see [`scalar::Real`]);
//! geometry defaults to `f64` while attention/feature math may run in
//! `f32`. Concrete aliases for both live at the crate root.

pub mod attention;
pub mod config;
pub mod embed;
pub mod error;
pub mod geom;
pub mod harness;
pub mod io;
pub(crate) mod linalg;
pub mod losses;
pub mod metrics;
pub mod pipeline;
pub mod point_match;
pub mod registration;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod superpoint;
pub mod synth;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use scalar::Real;

/// Point cloud with `f64` coordinates, the default for geometry.
pub type PointCloud64 = geom::PointCloud<f64>;
/// Point cloud with `f32` coordinates.
pub type PointCloud32 = geom::PointCloud<f32>;
/// Rigid transform in double precision.
pub type RigidTransform64 = geom::RigidTransform<f64>;
/// Rigid transform in single precision.
pub type RigidTransform32 = geom::RigidTransform<f32>;
/// Feature matrix (one row per point) in double precision.
pub type FeatureMatrix64 = nalgebra::DMatrix<f64>;
/// Feature matrix (one row per point) in single precision.
pub type FeatureMatrix32 = nalgebra::DMatrix<f32>;
