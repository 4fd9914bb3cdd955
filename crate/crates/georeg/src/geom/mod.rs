//! Foundational geometry: point clouds, rigid transforms, grid
//! downsampling, point-to-node grouping and the closed-form weighted
//! Procrustes solver.
//!
//! Everything here is a pure function over immutable inputs; all
//! operations are safe to call concurrently.

mod grid;
mod grouping;
mod procrustes;
mod transform;
mod voxel;

pub use grid::PointGrid;
pub use grouping::{point_to_node_grouping, PatchAssignment};
pub use procrustes::{weighted_residual, weighted_svd_transform};
pub use transform::{apply_transform, RigidTransform};
pub use voxel::voxel_downsample;

use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::{DMatrix, Point3};

/// Ordered set of 3D points with optional per-point feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Real> {
    points: Vec<Point3<T>>,
    features: Option<DMatrix<T>>,
}

impl<T: Real> PointCloud<T> {
    /// Builds a cloud from points, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3<T>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite_real() && p.y.is_finite_real() && p.z.is_finite_real()) {
                return Err(Error::InvalidInput(format!(
                    "point {i} has non-finite coordinates"
                )));
            }
        }
        Ok(Self {
            points,
            features: None,
        })
    }

    /// Attaches a feature matrix with one row per point.
    pub fn with_features(mut self, features: DMatrix<T>) -> Result<Self> {
        if features.nrows() != self.points.len() {
            return Err(Error::ShapeMismatch(format!(
                "feature rows {} != point count {}",
                features.nrows(),
                self.points.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::InvalidInput("feature width must be >= 1".into()));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            features: None,
        }
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn features(&self) -> Option<&DMatrix<T>> {
        self.features.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cloud containing the selected point indices (features sliced along).
    pub fn select(&self, indices: &[usize]) -> Self {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let features = self.features.as_ref().map(|f| {
            DMatrix::from_fn(indices.len(), f.ncols(), |r, c| f[(indices[r], c)])
        });
        Self { points, features }
    }

    /// Converts coordinates (and features) to another scalar type.
    pub fn cast<D: Real>(&self) -> PointCloud<D> {
        let points = self
            .points
            .iter()
            .map(|p| {
                Point3::new(
                    D::from_f64_lossy(p.x.to_f64_lossy()),
                    D::from_f64_lossy(p.y.to_f64_lossy()),
                    D::from_f64_lossy(p.z.to_f64_lossy()),
                )
            })
            .collect();
        PointCloud {
            points,
            features: self.features.as_ref().map(crate::scalar::cast_matrix),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_points() {
        let pts = vec![Point3::new(0.0, f64::NAN, 0.0)];
        assert!(matches!(
            PointCloud::new(pts),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn feature_row_count_must_match() {
        let cloud = PointCloud::new(vec![Point3::new(0.0f64, 0.0, 0.0)]).unwrap();
        let feats = DMatrix::zeros(2, 3);
        assert!(matches!(
            cloud.with_features(feats),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn select_slices_features() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ])
        .unwrap()
        .with_features(DMatrix::from_row_slice(3, 2, &[0., 1., 2., 3., 4., 5.]))
        .unwrap();
        let sub = cloud.select(&[2, 0]);
        assert_eq!(sub.points()[0].x, 2.0);
        assert_eq!(sub.features().unwrap()[(0, 0)], 4.0);
        assert_eq!(sub.features().unwrap()[(1, 1)], 1.0);
    }
}
