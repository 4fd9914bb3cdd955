//! Uniform hash grid for radius and nearest-neighbor queries.
//!
//! Internal accelerator; all query results are returned in ascending index
//! order so downstream computations stay deterministic.

use crate::scalar::Real;
use nalgebra::Point3;
use std::collections::HashMap;

pub struct PointGrid {
    cell: f64,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
    points: Vec<Point3<f64>>,
}

impl PointGrid {
    /// Builds a grid over the points with the given cell size (usually the
    /// query radius).
    pub fn build<T: Real>(points: &[Point3<T>], cell: f64) -> Self {
        let cell = cell.max(1e-12);
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        let pts: Vec<Point3<f64>> = points
            .iter()
            .map(|p| Point3::new(p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()))
            .collect();
        for (i, p) in pts.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            cells,
            points: pts,
        }
    }

    fn key(p: &Point3<f64>, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    /// Indices of points with `‖p - q‖ < radius`, ascending.
    pub fn within_radius<T: Real>(&self, q: &Point3<T>, radius: f64) -> Vec<usize> {
        let q = Point3::new(q.x.to_f64_lossy(), q.y.to_f64_lossy(), q.z.to_f64_lossy());
        let r2 = radius * radius;
        let reach = (radius / self.cell).ceil() as i64;
        let (cx, cy, cz) = Self::key(&q, self.cell);
        let mut out = Vec::new();
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(idxs) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in idxs {
                            if (self.points[i] - q).norm_squared() < r2 {
                                out.push(i);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest point within `radius`, ties broken by lower index.
    pub fn nearest_within<T: Real>(&self, q: &Point3<T>, radius: f64) -> Option<(usize, f64)> {
        let qf = Point3::new(q.x.to_f64_lossy(), q.y.to_f64_lossy(), q.z.to_f64_lossy());
        let mut best: Option<(usize, f64)> = None;
        for i in self.within_radius(q, radius) {
            let d = (self.points[i] - qf).norm();
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((i, d)),
            }
        }
        best
    }
}
