//! Shared helpers for unit tests.

use crate::geom::{PointCloud, RigidTransform};
use crate::rng::SplitMix64;
use nalgebra::{DMatrix, Point3, Vector3};

pub fn random_transform(rng: &mut SplitMix64) -> RigidTransform<f64> {
    let axis = rng.unit_vector();
    let angle = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
    let t = Vector3::new(
        rng.uniform(-2.0, 2.0),
        rng.uniform(-2.0, 2.0),
        rng.uniform(-2.0, 2.0),
    );
    RigidTransform::from_axis_angle(axis, angle, t).unwrap()
}

pub fn random_cloud(rng: &mut SplitMix64, n: usize, half_extent: f64) -> PointCloud<f64> {
    let pts = (0..n)
        .map(|_| {
            Point3::new(
                rng.uniform(-half_extent, half_extent),
                rng.uniform(-half_extent, half_extent),
                rng.uniform(-half_extent, half_extent),
            )
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

pub fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
}
