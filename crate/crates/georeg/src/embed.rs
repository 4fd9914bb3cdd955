//! Transformation-invariant geometric structure embedding.
//!
//! Superpoint geometry is encoded with quantities that survive any rigid
//! motion: pair-wise distances and, for each point, the angles formed by
//! its k nearest neighbors against every other point. Both are expanded
//! with the usual sinusoidal band embedding, projected, and aggregated
//! (max pooling over the k angle candidates) into one `d_t`-vector per
//! ordered superpoint pair.

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::linalg::{matmul_acc64, vecmat_acc64};
use crate::scalar::Real;
use nalgebra::{DMatrix, Point3, Vector3};

/// Configuration of the structure embedding.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingConfig {
    /// Embedding width `d_t` (positive even integer).
    pub dim: usize,
    /// Distance temperature in meters.
    pub sigma_d: f64,
    /// Angle temperature in radians.
    pub sigma_a: f64,
    /// Neighbor count for the angular embedding.
    pub k_neighbors: usize,
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim % 2 != 0 {
            return Err(Error::Config(format!(
                "embedding dim must be a positive even integer, got {}",
                self.dim
            )));
        }
        if !(self.sigma_d > 0.0) {
            return Err(Error::Config("sigma_d must be positive".into()));
        }
        if !(self.sigma_a > 0.0) {
            return Err(Error::Config("sigma_a must be positive".into()));
        }
        if self.k_neighbors == 0 {
            return Err(Error::Config("k_neighbors must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            sigma_d: 0.2,
            sigma_a: 15.0_f64.to_radians(),
            k_neighbors: 3,
        }
    }
}

/// Dense `n × n × dim` tensor stored as an `(n*n) × dim` matrix with the
/// pair `(i, j)` at row `i*n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTensor<T: Real> {
    n: usize,
    dim: usize,
    data: DMatrix<T>,
}

impl<T: Real> PairTensor<T> {
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Vec<T> {
        self.data
            .row(i * self.n + j)
            .transpose()
            .as_slice()
            .to_vec()
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn cast<D: Real>(&self) -> PairTensor<D> {
        PairTensor {
            n: self.n,
            dim: self.dim,
            data: crate::scalar::cast_matrix(&self.data),
        }
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        assert_eq!(self.data.shape(), other.data.shape());
        let mut m = 0.0f64;
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            m = m.max((a.to_f64_lossy() - b.to_f64_lossy()).abs());
        }
        m
    }
}

/// Sinusoidal band embedding: entry `2k` is `sin((v/σ) / 10000^{2k/d})`,
/// entry `2k+1` the matching cosine.
pub fn sinusoidal_embed<T: Real>(value: T, temperature: T, dim: usize) -> Result<Vec<T>> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::Config(format!(
            "sinusoidal embedding needs a positive even dim, got {dim}"
        )));
    }
    if !(temperature > T::zero()) {
        return Err(Error::Config("temperature must be positive".into()));
    }
    let scaled = value / temperature;
    let mut out = vec![T::zero(); dim];
    for band in 0..dim / 2 {
        let exponent = 2.0 * band as f64 / dim as f64;
        let divisor = T::from_f64_lossy(10000.0f64.powf(exponent));
        let arg = scaled / divisor;
        out[2 * band] = arg.sin();
        out[2 * band + 1] = arg.cos();
    }
    Ok(out)
}

/// Pair-wise distance embedding: `r^D_{i,j} = sinusoidal(‖p_i - p_j‖ / σ_d)`.
pub fn pairwise_distance_embedding<T: Real>(
    superpoints: &PointCloud<T>,
    cfg: &EmbeddingConfig,
) -> Result<PairTensor<T>> {
    cfg.validate()?;
    if superpoints.is_empty() {
        return Err(Error::InvalidInput("need at least one superpoint".into()));
    }
    let n = superpoints.len();
    let sigma = T::from_f64_lossy(cfg.sigma_d);
    let mut data = DMatrix::<T>::zeros(n * n, cfg.dim);
    for i in 0..n {
        for j in 0..n {
            let d = (superpoints.points()[i] - superpoints.points()[j]).norm();
            let e = sinusoidal_embed(d, sigma, cfg.dim)?;
            for (c, v) in e.into_iter().enumerate() {
                data[(i * n + j, c)] = v;
            }
        }
    }
    Ok(PairTensor {
        n,
        dim: cfg.dim,
        data,
    })
}

/// k-nearest-neighbor table (self excluded, ties broken by index).
pub fn knn_indices<T: Real>(points: &[Point3<T>], k: usize) -> Result<Vec<Vec<usize>>> {
    if points.len() < k + 1 {
        return Err(Error::Config(format!(
            "angular embedding needs at least k+1 = {} points, got {}",
            k + 1,
            points.len()
        )));
    }
    let mut table = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let mut order: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, q)| ((q - p).norm_squared().to_f64_lossy(), j))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).unwrap());
        table.push(order.into_iter().take(k).map(|(_, j)| j).collect());
    }
    Ok(table)
}

/// Angle between `u` and `v` in `[0, π]`, stable near both ends.
///
/// A zero vector on either side yields 0 by convention (the self pair
/// `j = i`). The explicit guard matters: a signed-zero dot product would
/// otherwise make `atan2` return π for some orientations.
fn angle_between<T: Real>(u: &Vector3<T>, v: &Vector3<T>) -> T {
    if u.norm_squared() == T::zero() || v.norm_squared() == T::zero() {
        return T::zero();
    }
    u.cross(v).norm().atan2(u.dot(v))
}

/// Triplet-wise angular embedding tensor `n × n × k × dim` plus the
/// neighbor table it was built from. Row layout: `(i*n + j)*k + x`.
#[derive(Debug, Clone)]
pub struct AngularEmbedding<T: Real> {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub data: DMatrix<T>,
    pub neighbors: Vec<Vec<usize>>,
}

impl<T: Real> AngularEmbedding<T> {
    pub fn entry(&self, i: usize, j: usize, x: usize) -> Vec<T> {
        self.data
            .row((i * self.n + j) * self.k + x)
            .transpose()
            .as_slice()
            .to_vec()
    }
}

/// Materializes the full angular embedding tensor.
pub fn triplet_angular_embedding<T: Real>(
    superpoints: &PointCloud<T>,
    cfg: &EmbeddingConfig,
) -> Result<AngularEmbedding<T>> {
    cfg.validate()?;
    let neighbors = knn_indices(superpoints.points(), cfg.k_neighbors)?;
    let n = superpoints.len();
    let k = cfg.k_neighbors;
    let sigma = T::from_f64_lossy(cfg.sigma_a);
    let pts = superpoints.points();
    let mut data = DMatrix::<T>::zeros(n * n * k, cfg.dim);
    for i in 0..n {
        for j in 0..n {
            let to_j = pts[j] - pts[i];
            for (x, &nb) in neighbors[i].iter().enumerate() {
                let to_nb = pts[nb] - pts[i];
                let alpha = angle_between(&to_nb, &to_j);
                let e = sinusoidal_embed(alpha, sigma, cfg.dim)?;
                let row = (i * n + j) * k + x;
                for (c, v) in e.into_iter().enumerate() {
                    data[(row, c)] = v;
                }
            }
        }
    }
    Ok(AngularEmbedding {
        n,
        k,
        dim: cfg.dim,
        data,
        neighbors,
    })
}

/// Full geometric structure embedding:
/// `r_{i,j} = r^D_{i,j} W^D + max_x { r^A_{i,j,x} W^A }` with the max taken
/// component-wise over the k angle candidates.
///
/// The angular branch streams row by row instead of materializing the
/// `n²·k` tensor.
pub fn geometric_structure_embedding<T: Real>(
    superpoints: &PointCloud<T>,
    cfg: &EmbeddingConfig,
    w_d: &DMatrix<T>,
    w_a: &DMatrix<T>,
) -> Result<PairTensor<T>> {
    cfg.validate()?;
    if w_d.shape() != (cfg.dim, cfg.dim) || w_a.shape() != (cfg.dim, cfg.dim) {
        return Err(Error::ShapeMismatch(format!(
            "projection matrices must be {0}×{0}",
            cfg.dim
        )));
    }
    let dist = pairwise_distance_embedding(superpoints, cfg)?;
    let neighbors = knn_indices(superpoints.points(), cfg.k_neighbors)?;
    let n = superpoints.len();
    let d = cfg.dim;
    let sigma = T::from_f64_lossy(cfg.sigma_a);
    let pts = superpoints.points();

    let mut out = matmul_acc64(&dist.data, w_d);
    let mut projected = vec![T::zero(); d];
    for i in 0..n {
        for j in 0..n {
            let to_j = pts[j] - pts[i];
            let row = i * n + j;
            let mut pooled = vec![T::from_f64_lossy(f64::NEG_INFINITY); d];
            for &nb in &neighbors[i] {
                let to_nb = pts[nb] - pts[i];
                let alpha = angle_between(&to_nb, &to_j);
                let embedded = sinusoidal_embed(alpha, sigma, d)?;
                vecmat_acc64(&embedded, w_a, &mut projected);
                for (slot, &v) in pooled.iter_mut().zip(projected.iter()) {
                    *slot = slot.max(v);
                }
            }
            for (c, &v) in pooled.iter().enumerate() {
                out[(row, c)] += v;
            }
        }
    }
    Ok(PairTensor {
        n,
        dim: d,
        data: out,
    })
}
