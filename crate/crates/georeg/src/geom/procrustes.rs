//! Weighted Procrustes: closed-form rigid alignment of weighted point
//! pairs via SVD of the cross-covariance.

use crate::error::{Error, Result};
use crate::geom::RigidTransform;
use crate::scalar::Real;
use nalgebra::{Matrix3, Point3, Vector3};

/// Solves `min_{R,t} Σ w_j ‖R p_j + t - q_j‖²` in closed form.
///
/// Requires at least 3 pairs with positive total weight and a
/// cross-covariance of rank ≥ 2 (collinear or coincident sources are
/// rejected). `det(R) = +1` is enforced by flipping the singular vector
/// of the smallest singular value when needed.
pub fn weighted_svd_transform<T: Real>(
    src: &[Point3<T>],
    dst: &[Point3<T>],
    weights: &[T],
) -> Result<RigidTransform<T>> {
    if src.len() != dst.len() || src.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "src/dst/weights lengths {}/{}/{} differ",
            src.len(),
            dst.len(),
            weights.len()
        )));
    }
    if src.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 correspondences, got {}",
            src.len()
        )));
    }
    let mut total_w = 0.0f64;
    for w in weights {
        let wf = w.to_f64_lossy();
        if !(wf >= 0.0) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        total_w += wf;
    }
    if total_w <= 0.0 {
        return Err(Error::Degenerate("total weight is zero".into()));
    }

    // Weighted centroids and cross-covariance, accumulated in f64.
    let mut cp = Vector3::<f64>::zeros();
    let mut cq = Vector3::<f64>::zeros();
    for ((p, q), w) in src.iter().zip(dst).zip(weights) {
        let w = w.to_f64_lossy();
        cp += w * Vector3::new(p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy());
        cq += w * Vector3::new(q.x.to_f64_lossy(), q.y.to_f64_lossy(), q.z.to_f64_lossy());
    }
    cp /= total_w;
    cq /= total_w;

    let mut h = Matrix3::<f64>::zeros();
    for ((p, q), w) in src.iter().zip(dst).zip(weights) {
        let w = w.to_f64_lossy();
        if w == 0.0 {
            continue;
        }
        let dp = Vector3::new(p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()) - cp;
        let dq = Vector3::new(q.x.to_f64_lossy(), q.y.to_f64_lossy(), q.z.to_f64_lossy()) - cq;
        h += w * dp * dq.transpose();
    }

    let svd = h.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let sv = svd.singular_values;

    // Rank check: two significant singular values pin down the rotation.
    let mut ordered = [sv[0], sv[1], sv[2]];
    ordered.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if !(ordered[0] > 0.0) || ordered[1] <= ordered[0] * 1e-12 {
        return Err(Error::Degenerate(
            "cross-covariance rank < 2 (collinear or coincident points)".into(),
        ));
    }

    let v = v_t.transpose();
    let mut rotation = v * u.transpose();
    if rotation.determinant() < 0.0 {
        // flip the column of V paired with the smallest singular value
        let min_idx = (0..3).min_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap()).unwrap();
        let mut v_fixed = v;
        for r in 0..3 {
            v_fixed[(r, min_idx)] = -v_fixed[(r, min_idx)];
        }
        rotation = v_fixed * u.transpose();
    }
    let translation = cq - rotation * cp;

    RigidTransform::new(
        rotation.map(T::from_f64_lossy),
        translation.map(T::from_f64_lossy),
    )
}

/// Weighted squared residual `Σ w_j ‖R p_j + t - q_j‖²` of a candidate
/// transform, the quantity the solver minimizes.
pub fn weighted_residual<T: Real>(
    transform: &RigidTransform<T>,
    src: &[Point3<T>],
    dst: &[Point3<T>],
    weights: &[T],
) -> f64 {
    let mut acc = 0.0;
    for ((p, q), w) in src.iter().zip(dst).zip(weights) {
        let moved = transform.apply_point(p);
        acc += w.to_f64_lossy() * (moved - q).norm_squared().to_f64_lossy();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::transform::apply_transform;
    use crate::geom::PointCloud;
    use crate::rng::SplitMix64;
    use crate::testutil::{random_cloud, random_transform};

    fn recoverable_points() -> Vec<Point3<f64>> {
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.3, 0.4, 1.2),
        ]
    }

    #[test]
    fn identity_on_identical_sets() {
        let src = recoverable_points();
        let t = weighted_svd_transform(&src, &src, &[1.0; 4]).unwrap();
        assert!((t.rotation() - Matrix3::identity()).norm() < 1e-9);
        assert!(t.translation().norm() < 1e-9);
    }

    #[test]
    fn recovers_constructed_transform() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..100 {
            let t0 = random_transform(&mut rng);
            let src = random_cloud(&mut rng, 8, 1.0);
            let dst = apply_transform(&t0, &src).unwrap();
            let est =
                weighted_svd_transform(src.points(), dst.points(), &vec![1.0; 8]).unwrap();
            assert!((est.rotation() - t0.rotation()).norm() < 1e-9);
            assert!((est.translation() - t0.translation()).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_weight_pairs_have_no_influence() {
        let mut rng = SplitMix64::new(5);
        let t0 = random_transform(&mut rng);
        let mut src = recoverable_points();
        src.push(Point3::new(0.5, 0.5, 0.5));
        let clean = PointCloud::new(src.clone()).unwrap();
        let mut dst = apply_transform(&t0, &clean).unwrap().points().to_vec();
        let expected = weighted_svd_transform(&src, &dst, &[1.0; 5]).unwrap();
        // two outlier pairs with wildly wrong targets, weight 0
        src.push(Point3::new(-0.2, 0.1, 0.9));
        dst.push(Point3::new(100.0, -50.0, 3.0));
        src.push(Point3::new(0.7, -0.3, 0.2));
        dst.push(Point3::new(-90.0, 4.0, 12.0));
        let weights = [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let est = weighted_svd_transform(&src, &dst, &weights).unwrap();
        assert!((est.rotation() - expected.rotation()).norm() < 1e-12);
        assert!((est.translation() - expected.translation()).norm() < 1e-12);
        assert!((est.rotation() - t0.rotation()).norm() < 1e-9);
        assert!((est.translation() - t0.translation()).norm() < 1e-9);
    }

    #[test]
    fn too_few_pairs_is_degenerate() {
        let p = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            weighted_svd_transform(&p, &p, &[1.0, 1.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn collinear_sources_are_degenerate() {
        let src = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(3.0, 0.0, 0.0),
        ];
        let mut rng = SplitMix64::new(2);
        let t0 = random_transform(&mut rng);
        let dst: Vec<_> = src.iter().map(|p| t0.apply_point(p)).collect();
        assert!(matches!(
            weighted_svd_transform(&src, &dst, &[1.0; 4]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn planar_sources_are_fine() {
        let src = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ];
        let mut rng = SplitMix64::new(4);
        let t0 = random_transform(&mut rng);
        let dst: Vec<_> = src.iter().map(|p| t0.apply_point(p)).collect();
        let est = weighted_svd_transform(&src, &dst, &[1.0; 4]).unwrap();
        assert!((est.rotation() - t0.rotation()).norm() < 1e-9);
    }

    #[test]
    fn solution_is_locally_optimal() {
        let mut rng = SplitMix64::new(13);
        for _ in 0..20 {
            let t0 = random_transform(&mut rng);
            let src = random_cloud(&mut rng, 10, 1.0);
            let mut dst = apply_transform(&t0, &src).unwrap().points().to_vec();
            // perturb targets so the optimum has nonzero residual
            for q in dst.iter_mut() {
                q.x += rng.uniform(-0.01, 0.01);
                q.y += rng.uniform(-0.01, 0.01);
                q.z += rng.uniform(-0.01, 0.01);
            }
            let weights: Vec<f64> = (0..10).map(|_| rng.uniform(0.1, 1.0)).collect();
            let est = weighted_svd_transform(src.points(), &dst, &weights).unwrap();
            let base = weighted_residual(&est, src.points(), &dst, &weights);
            for _ in 0..10 {
                let axis = rng.unit_vector();
                let pert = RigidTransform::from_axis_angle(
                    axis,
                    rng.uniform(-1e-3, 1e-3),
                    Vector3::new(
                        rng.uniform(-1e-3, 1e-3),
                        rng.uniform(-1e-3, 1e-3),
                        rng.uniform(-1e-3, 1e-3),
                    ),
                )
                .unwrap();
                let wiggled = pert.compose(&est);
                let res = weighted_residual(&wiggled, src.points(), &dst, &weights);
                assert!(base <= res + 1e-15);
            }
        }
    }
}
