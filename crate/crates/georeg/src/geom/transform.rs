//! Rigid transforms and their application to point clouds.

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::scalar::Real;
use nalgebra::{Matrix3, Point3, Unit, Vector3};

/// Rigid transform `x -> R x + t` with `R` a proper rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<T: Real> {
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

impl<T: Real> RigidTransform<T> {
    /// Builds a transform, checking `R` is orthonormal with det +1.
    ///
    /// The tolerance scales with the scalar's epsilon so `f32` transforms
    /// validate at a correspondingly looser bound than the `1e-9` used
    /// for `f64`.
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self> {
        let tol = Self::orthonormality_tol();
        let gram = rotation.transpose() * rotation;
        let mut max_dev = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                max_dev = max_dev.max((gram[(i, j)] - target).abs());
            }
        }
        if max_dev > tol {
            return Err(Error::InvalidInput(format!(
                "rotation is not orthonormal (max deviation {:e})",
                max_dev.to_f64_lossy()
            )));
        }
        let det = rotation.determinant();
        if (det - T::one()).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "rotation determinant {} is not +1",
                det.to_f64_lossy()
            )));
        }
        for v in translation.iter() {
            if !v.is_finite_real() {
                return Err(Error::InvalidInput("non-finite translation".into()));
            }
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    fn orthonormality_tol() -> T {
        let eps = T::default_epsilon().to_f64_lossy();
        T::from_f64_lossy((eps * 100.0).max(1e-9))
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation about `axis` by `angle` (radians) followed by `translation`.
    pub fn from_axis_angle(axis: Vector3<T>, angle: T, translation: Vector3<T>) -> Result<Self> {
        let n = axis.norm();
        if n <= T::zero() {
            return Err(Error::InvalidInput("zero rotation axis".into()));
        }
        let rot = nalgebra::Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self::new(rot.into_inner(), translation)
    }

    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    pub fn apply_point(&self, p: &Point3<T>) -> Point3<T> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    /// Analytic inverse: `R^T, -R^T t`.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn cast<D: Real>(&self) -> RigidTransform<D> {
        RigidTransform {
            rotation: self.rotation.map(|v| D::from_f64_lossy(v.to_f64_lossy())),
            translation: self
                .translation
                .map(|v| D::from_f64_lossy(v.to_f64_lossy())),
        }
    }

    /// Row-major rotation entries, the order used in JSON reports.
    pub fn rotation_row_major(&self) -> [f64; 9] {
        let r = &self.rotation;
        let mut out = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                out[i * 3 + j] = r[(i, j)].to_f64_lossy();
            }
        }
        out
    }

    pub fn from_row_major(r: &[f64; 9], t: &[f64; 3]) -> Result<RigidTransform<T>> {
        let rotation = Matrix3::from_fn(|i, j| T::from_f64_lossy(r[i * 3 + j]));
        let translation = Vector3::from_fn(|i, _| T::from_f64_lossy(t[i]));
        RigidTransform::new(rotation, translation)
    }
}

/// Applies `T` to every point; features are carried through unchanged.
pub fn apply_transform<T: Real>(
    transform: &RigidTransform<T>,
    cloud: &PointCloud<T>,
) -> Result<PointCloud<T>> {
    let mut points = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().iter().enumerate() {
        if !(p.x.is_finite_real() && p.y.is_finite_real() && p.z.is_finite_real()) {
            return Err(Error::InvalidInput(format!(
                "point {i} has non-finite coordinates"
            )));
        }
        points.push(transform.apply_point(p));
    }
    let out = PointCloud::new(points)?;
    match cloud.features() {
        Some(f) => out.with_features(f.clone()),
        None => Ok(out),
    }
}
