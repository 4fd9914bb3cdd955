//! Grid (voxel) downsampling.

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::scalar::Real;
use nalgebra::Point3;
use std::collections::HashMap;

fn cell_of<T: Real>(p: &Point3<T>, inv_voxel: f64) -> (i64, i64, i64) {
    (
        (p.x.to_f64_lossy() * inv_voxel).floor() as i64,
        (p.y.to_f64_lossy() * inv_voxel).floor() as i64,
        (p.z.to_f64_lossy() * inv_voxel).floor() as i64,
    )
}

/// Downsamples to one point per occupied voxel, the centroid of the
/// voxel's members. Feature rows, when present, are averaged the same way.
///
/// Output voxels appear in first-occurrence order of their members, so the
/// result is deterministic.
pub fn voxel_downsample<T: Real>(cloud: &PointCloud<T>, voxel_size: f64) -> Result<PointCloud<T>> {
    if !(voxel_size > 0.0) {
        return Err(Error::Config(format!(
            "voxel size must be positive, got {voxel_size}"
        )));
    }
    if cloud.is_empty() {
        return Ok(PointCloud::empty());
    }

    let inv = 1.0 / voxel_size;
    let dim = cloud.features().map_or(0, |f| f.ncols());
    let mut slots: HashMap<(i64, i64, i64), usize> = HashMap::new();
    // accumulator per occupied voxel: point sum, feature sum, count
    let mut sums: Vec<([f64; 3], Vec<f64>, usize)> = Vec::new();

    for (idx, p) in cloud.points().iter().enumerate() {
        let key = cell_of(p, inv);
        let slot = *slots.entry(key).or_insert_with(|| {
            sums.push(([0.0; 3], vec![0.0; dim], 0));
            sums.len() - 1
        });
        let (ref mut xyz, ref mut feat, ref mut n) = sums[slot];
        xyz[0] += p.x.to_f64_lossy();
        xyz[1] += p.y.to_f64_lossy();
        xyz[2] += p.z.to_f64_lossy();
        if let Some(f) = cloud.features() {
            for c in 0..dim {
                feat[c] += f[(idx, c)].to_f64_lossy();
            }
        }
        *n += 1;
    }

    let points = sums
        .iter()
        .map(|(xyz, _, n)| {
            let inv_n = 1.0 / *n as f64;
            Point3::new(
                T::from_f64_lossy(xyz[0] * inv_n),
                T::from_f64_lossy(xyz[1] * inv_n),
                T::from_f64_lossy(xyz[2] * inv_n),
            )
        })
        .collect();
    let out = PointCloud::new(points)?;
    if cloud.features().is_some() {
        let feats = nalgebra::DMatrix::from_fn(sums.len(), dim, |r, c| {
            T::from_f64_lossy(sums[r].1[c] / sums[r].2 as f64)
        });
        out.with_features(feats)
    } else {
        Ok(out)
    }
}
