//! Point-to-node grouping: assign each dense point to its nearest
//! superpoint, yielding a Voronoi decomposition of the cloud seeded by
//! the superpoints.

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::scalar::Real;

/// Result of grouping a dense cloud against a superpoint set.
///
/// Superpoints that attracted no dense point are pruned; `kept_superpoints`
/// maps the surviving patch index back to the original superpoint index.
#[derive(Debug, Clone)]
pub struct PatchAssignment {
    /// For each dense point, the index of its patch (into `patches`).
    pub patch_of_point: Vec<usize>,
    /// Dense point indices of every patch, each list ascending.
    pub patches: Vec<Vec<usize>>,
    /// Original superpoint index of each surviving patch.
    pub kept_superpoints: Vec<usize>,
}

impl PatchAssignment {
    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }
}

/// Assigns every dense point to its nearest superpoint (ties broken by the
/// lower superpoint index) and prunes superpoints with empty patches.
pub fn point_to_node_grouping<T: Real>(
    dense: &PointCloud<T>,
    superpoints: &PointCloud<T>,
) -> Result<PatchAssignment> {
    if superpoints.is_empty() {
        return Err(Error::InvalidInput("superpoint set is empty".into()));
    }
    if dense.is_empty() {
        return Err(Error::Degenerate(
            "no patches: dense cloud is empty".into(),
        ));
    }

    let mut nearest = vec![0usize; dense.len()];
    for (pi, p) in dense.points().iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = (superpoints.points()[0] - p).norm_squared();
        for (si, s) in superpoints.points().iter().enumerate().skip(1) {
            let d = (s - p).norm_squared();
            if d < best_d {
                best_d = d;
                best = si;
            }
        }
        nearest[pi] = best;
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); superpoints.len()];
    for (pi, &si) in nearest.iter().enumerate() {
        members[si].push(pi);
    }

    let mut kept_superpoints = Vec::new();
    let mut patches = Vec::new();
    let mut remap = vec![usize::MAX; superpoints.len()];
    for (si, list) in members.into_iter().enumerate() {
        if !list.is_empty() {
            remap[si] = patches.len();
            kept_superpoints.push(si);
            patches.push(list);
        }
    }
    let patch_of_point = nearest.into_iter().map(|si| remap[si]).collect();

    Ok(PatchAssignment {
        patch_of_point,
        patches,
        kept_superpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::testutil::random_cloud;
    use nalgebra::Point3;

    #[test]
    fn picks_nearest_superpoint() {
        let supers = PointCloud::new(vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
        ])
        .unwrap();
        let dense = PointCloud::new(vec![Point3::new(1.0f64, 0.0, 0.0)]).unwrap();
        let a = point_to_node_grouping(&dense, &supers).unwrap();
        assert_eq!(a.patch_of_point, vec![0]);
        assert_eq!(a.kept_superpoints, vec![0]); // superpoint 1 pruned
        assert_eq!(a.patches, vec![vec![0]]);
    }

    #[test]
    fn equidistant_point_goes_to_lower_index() {
        let supers = PointCloud::new(vec![
            Point3::new(-1.0f64, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
        ])
        .unwrap();
        let dense = PointCloud::new(vec![Point3::new(0.0f64, 0.0, 0.0)]).unwrap();
        let a = point_to_node_grouping(&dense, &supers).unwrap();
        assert_eq!(a.kept_superpoints[a.patch_of_point[0]], 0);
    }

    #[test]
    fn matches_brute_force_scan() {
        let mut rng = SplitMix64::new(31);
        let dense = random_cloud(&mut rng, 500, 1.0);
        let supers = random_cloud(&mut rng, 20, 1.0);
        let a = point_to_node_grouping(&dense, &supers).unwrap();
        for (pi, p) in dense.points().iter().enumerate() {
            let (mut best, mut best_d) = (0usize, f64::INFINITY);
            for (si, s) in supers.points().iter().enumerate() {
                let d = (s - p).norm();
                if d < best_d {
                    best_d = d;
                    best = si;
                }
            }
            assert_eq!(a.kept_superpoints[a.patch_of_point[pi]], best);
        }
        // every dense point in exactly one patch
        let total: usize = a.patches.iter().map(Vec::len).sum();
        assert_eq!(total, dense.len());
        assert!(a.patches.iter().all(|p| !p.is_empty()));
    }

    #[test]
    fn empty_dense_cloud_is_an_error() {
        let supers = PointCloud::new(vec![Point3::new(0.0f64, 0.0, 0.0)]).unwrap();
        let r = point_to_node_grouping(&PointCloud::empty(), &supers);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn empty_superpoints_is_an_error() {
        let dense = PointCloud::new(vec![Point3::new(0.0f64, 0.0, 0.0)]).unwrap();
        assert!(point_to_node_grouping(&dense, &PointCloud::empty()).is_err());
    }
}
