//! Geometric self-attention, feature-based cross-attention, and the
//! interleaved stack that produces the hybrid superpoint features.
//!
//! Self-attention scores add a projected geometric structure embedding to
//! the key term:
//!
//! ```text
//! e_ij = (x_i Wq) (x_j Wk + r_ij Wr)^T / sqrt(d_head)
//! ```
//!
//! so the learned correlations respect the rigid-invariant structure of
//! the cloud. Cross-attention is plain scaled dot-product attention from
//! one cloud's features into the other's. Each attention call is wrapped
//! in the usual block: output projection, residual, layer norm,
//! feed-forward (hidden width `2·d_t`, ReLU), residual, layer norm.
//!
//! Multi-head detail: queries/keys/values and the projected embedding are
//! split channel-wise into `h` slices; with `h = 1` this reduces to the
//! single-head formula exactly.

mod weights;

pub use weights::{
    AttentionWeights, CrossAttentionLayer, FeedForward, LayerNorm, SelfAttentionLayer, Stage,
};

use crate::embed::{geometric_structure_embedding, EmbeddingConfig, PairTensor};
use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::linalg::matmul_acc64;
use crate::scalar::Real;
use nalgebra::DMatrix;

/// Row-wise softmax with max-subtraction, accumulated in f64.
pub fn softmax_rows<T: Real>(scores: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = scores.shape();
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        let mut row_max = f64::NEG_INFINITY;
        for j in 0..m {
            row_max = row_max.max(scores[(i, j)].to_f64_lossy());
        }
        let mut denom = 0.0f64;
        let mut exps = vec![0.0f64; m];
        for j in 0..m {
            let e = (scores[(i, j)].to_f64_lossy() - row_max).exp();
            exps[j] = e;
            denom += e;
        }
        for j in 0..m {
            out[(i, j)] = T::from_f64_lossy(exps[j] / denom);
        }
    }
    out
}

fn layer_norm<T: Real>(x: &DMatrix<T>, norm: &LayerNorm<T>) -> DMatrix<T> {
    const EPS: f64 = 1e-5;
    let (n, d) = x.shape();
    let mut out = DMatrix::zeros(n, d);
    for i in 0..n {
        let mut mean = 0.0f64;
        for j in 0..d {
            mean += x[(i, j)].to_f64_lossy();
        }
        mean /= d as f64;
        let mut var = 0.0f64;
        for j in 0..d {
            let dv = x[(i, j)].to_f64_lossy() - mean;
            var += dv * dv;
        }
        var /= d as f64;
        let inv = 1.0 / (var + EPS).sqrt();
        for j in 0..d {
            let nrm = (x[(i, j)].to_f64_lossy() - mean) * inv;
            out[(i, j)] = T::from_f64_lossy(
                nrm * norm.gain[(0, j)].to_f64_lossy() + norm.bias[(0, j)].to_f64_lossy(),
            );
        }
    }
    out
}

fn feed_forward<T: Real>(x: &DMatrix<T>, ff: &FeedForward<T>) -> DMatrix<T> {
    let mut hidden = matmul_acc64(x, &ff.w1);
    for i in 0..hidden.nrows() {
        for j in 0..hidden.ncols() {
            let v = hidden[(i, j)] + ff.b1[(0, j)];
            hidden[(i, j)] = v.max(T::zero());
        }
    }
    let mut out = matmul_acc64(&hidden, &ff.w2);
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] += ff.b2[(0, j)];
        }
    }
    out
}

/// Residual + norm + feed-forward + residual + norm around an attention
/// output.
fn transformer_block<T: Real>(
    input: &DMatrix<T>,
    attn_values: &DMatrix<T>,
    wo: &DMatrix<T>,
    norm1: &LayerNorm<T>,
    ff: &FeedForward<T>,
    norm2: &LayerNorm<T>,
) -> DMatrix<T> {
    let projected = matmul_acc64(attn_values, wo);
    let y1 = layer_norm(&(input + projected), norm1);
    let f = feed_forward(&y1, ff);
    layer_norm(&(&y1 + f), norm2)
}

/// Per-head attention score matrices for geometric self-attention.
///
/// Instead of materializing `r_ij Wr` for every pair, the head slice of
/// `q_i` is folded into `Wr` once (`u_i = (Wr q_i_head)`), turning the
/// embedding term into a dot with the raw embedding row.
fn self_attention_scores<T: Real>(
    x: &DMatrix<T>,
    geo: &PairTensor<T>,
    layer: &SelfAttentionLayer<T>,
) -> Result<Vec<DMatrix<T>>> {
    let n = x.nrows();
    let d = layer.wq.nrows();
    if x.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "feature width {} != layer dim {d}",
            x.ncols()
        )));
    }
    if geo.side() != n || geo.dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "embedding tensor {}x{} does not match features {n}x{d}",
            geo.side(),
            geo.dim()
        )));
    }
    let heads = layer.heads;
    let dh = d / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = matmul_acc64(x, &layer.wq);
    let k = matmul_acc64(x, &layer.wk);
    let geo_data = geo.data();

    let mut per_head = Vec::with_capacity(heads);
    for h in 0..heads {
        let lo = h * dh;
        // u[i][a] = sum_{c in head} wr[a, c] * q[i, c]
        let mut u = vec![vec![0.0f64; d]; n];
        for (i, ui) in u.iter_mut().enumerate() {
            for (a, slot) in ui.iter_mut().enumerate() {
                let mut acc = 0.0f64;
                for c in lo..lo + dh {
                    acc += layer.wr[(a, c)].to_f64_lossy() * q[(i, c)].to_f64_lossy();
                }
                *slot = acc;
            }
        }
        let mut scores = DMatrix::<T>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut qk = 0.0f64;
                for c in lo..lo + dh {
                    qk += q[(i, c)].to_f64_lossy() * k[(j, c)].to_f64_lossy();
                }
                let mut qr = 0.0f64;
                let row = i * n + j;
                for (a, uv) in u[i].iter().enumerate() {
                    qr += geo_data[(row, a)].to_f64_lossy() * uv;
                }
                scores[(i, j)] = T::from_f64_lossy((qk + qr) * scale);
            }
        }
        per_head.push(scores);
    }
    Ok(per_head)
}

/// Attention weights (post-softmax) of each head, exposed for tests.
pub fn self_attention_matrix<T: Real>(
    x: &DMatrix<T>,
    geo: &PairTensor<T>,
    layer: &SelfAttentionLayer<T>,
) -> Result<Vec<DMatrix<T>>> {
    Ok(self_attention_scores(x, geo, layer)?
        .iter()
        .map(softmax_rows)
        .collect())
}

/// Pre-block output of geometric self-attention: the head-concatenated
/// weighted values `z_i = Σ_j a_ij (x_j Wv)`.
pub fn self_attention_values<T: Real>(
    x: &DMatrix<T>,
    geo: &PairTensor<T>,
    layer: &SelfAttentionLayer<T>,
) -> Result<DMatrix<T>> {
    let n = x.nrows();
    let d = layer.wq.nrows();
    let heads = layer.heads;
    let dh = d / heads;
    let attn = self_attention_matrix(x, geo, layer)?;
    let v = matmul_acc64(x, &layer.wv);
    let mut z = DMatrix::<T>::zeros(n, d);
    for (h, a) in attn.iter().enumerate() {
        let lo = h * dh;
        for i in 0..n {
            for c in lo..lo + dh {
                let mut acc = 0.0f64;
                for j in 0..n {
                    acc += a[(i, j)].to_f64_lossy() * v[(j, c)].to_f64_lossy();
                }
                z[(i, c)] = T::from_f64_lossy(acc);
            }
        }
    }
    Ok(z)
}

/// Geometric self-attention with the surrounding transformer block.
pub fn geometric_self_attention<T: Real>(
    x: &DMatrix<T>,
    geo: &PairTensor<T>,
    layer: &SelfAttentionLayer<T>,
) -> Result<DMatrix<T>> {
    let z = self_attention_values(x, geo, layer)?;
    Ok(transformer_block(
        x,
        &z,
        &layer.wo,
        &layer.norm1,
        &layer.ff,
        &layer.norm2,
    ))
}

fn cross_attention_scores<T: Real>(
    x_p: &DMatrix<T>,
    x_q: &DMatrix<T>,
    layer: &CrossAttentionLayer<T>,
) -> Result<Vec<DMatrix<T>>> {
    let d = layer.wq.nrows();
    if x_p.ncols() != d || x_q.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "cross-attention feature widths {}/{} != layer dim {d}",
            x_p.ncols(),
            x_q.ncols()
        )));
    }
    let heads = layer.heads;
    let dh = d / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = matmul_acc64(x_p, &layer.wq);
    let k = matmul_acc64(x_q, &layer.wk);
    let (np, nq) = (x_p.nrows(), x_q.nrows());
    let mut per_head = Vec::with_capacity(heads);
    for h in 0..heads {
        let lo = h * dh;
        let mut scores = DMatrix::<T>::zeros(np, nq);
        for i in 0..np {
            for j in 0..nq {
                let mut acc = 0.0f64;
                for c in lo..lo + dh {
                    acc += q[(i, c)].to_f64_lossy() * k[(j, c)].to_f64_lossy();
                }
                scores[(i, j)] = T::from_f64_lossy(acc * scale);
            }
        }
        per_head.push(scores);
    }
    Ok(per_head)
}

/// Post-softmax cross-attention weights of each head.
pub fn cross_attention_matrix<T: Real>(
    x_p: &DMatrix<T>,
    x_q: &DMatrix<T>,
    layer: &CrossAttentionLayer<T>,
) -> Result<Vec<DMatrix<T>>> {
    Ok(cross_attention_scores(x_p, x_q, layer)?
        .iter()
        .map(softmax_rows)
        .collect())
}

/// Pre-block cross-attention output: `z_i = Σ_j a_ij (x^Q_j Wv)`.
pub fn cross_attention_values<T: Real>(
    x_p: &DMatrix<T>,
    x_q: &DMatrix<T>,
    layer: &CrossAttentionLayer<T>,
) -> Result<DMatrix<T>> {
    let d = layer.wq.nrows();
    let heads = layer.heads;
    let dh = d / heads;
    let attn = cross_attention_matrix(x_p, x_q, layer)?;
    let v = matmul_acc64(x_q, &layer.wv);
    let (np, nq) = (x_p.nrows(), x_q.nrows());
    let mut z = DMatrix::<T>::zeros(np, d);
    for (h, a) in attn.iter().enumerate() {
        let lo = h * dh;
        for i in 0..np {
            for c in lo..lo + dh {
                let mut acc = 0.0f64;
                for j in 0..nq {
                    acc += a[(i, j)].to_f64_lossy() * v[(j, c)].to_f64_lossy();
                }
                z[(i, c)] = T::from_f64_lossy(acc);
            }
        }
    }
    Ok(z)
}

/// Feature-based cross-attention with the surrounding transformer block.
pub fn feature_cross_attention<T: Real>(
    x_p: &DMatrix<T>,
    x_q: &DMatrix<T>,
    layer: &CrossAttentionLayer<T>,
) -> Result<DMatrix<T>> {
    let z = cross_attention_values(x_p, x_q, layer)?;
    Ok(transformer_block(
        x_p,
        &z,
        &layer.wo,
        &layer.norm1,
        &layer.ff,
        &layer.norm2,
    ))
}

/// Runs the interleaved attention stack and returns the hybrid features
/// `(H_P, H_Q)`.
///
/// Stage order per round `t`: self-attention on each cloud, then
/// cross-attention for P against Q, then cross-attention for Q against
/// the *updated* P features. The geometric structure embeddings are
/// computed once per cloud and shared by every round.
pub fn transformer_stack<T: Real>(
    f_p: &DMatrix<T>,
    f_q: &DMatrix<T>,
    p_hat: &PointCloud<T>,
    q_hat: &PointCloud<T>,
    w: &AttentionWeights<T>,
    cfg: &EmbeddingConfig,
    n_t: usize,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if f_p.ncols() != w.input_dim || f_q.ncols() != w.input_dim {
        return Err(Error::ShapeMismatch(format!(
            "backbone feature widths {}/{} != input projection rows {}",
            f_p.ncols(),
            f_q.ncols(),
            w.input_dim
        )));
    }
    if f_p.nrows() != p_hat.len() || f_q.nrows() != q_hat.len() {
        return Err(Error::ShapeMismatch(
            "feature row counts do not match superpoint counts".into(),
        ));
    }
    if n_t > w.stages.len() {
        return Err(Error::Config(format!(
            "requested {n_t} rounds but weights hold {}",
            w.stages.len()
        )));
    }
    if cfg.dim != w.dim {
        return Err(Error::Config(format!(
            "embedding dim {} != attention dim {}",
            cfg.dim, w.dim
        )));
    }

    let mut x_p = matmul_acc64(f_p, &w.w_in);
    let mut x_q = matmul_acc64(f_q, &w.w_in);

    if n_t > 0 {
        let geo_p = geometric_structure_embedding(p_hat, cfg, &w.w_d, &w.w_a)?;
        let geo_q = geometric_structure_embedding(q_hat, cfg, &w.w_d, &w.w_a)?;
        for stage in w.stages.iter().take(n_t) {
            x_p = geometric_self_attention(&x_p, &geo_p, &stage.self_attn)?;
            x_q = geometric_self_attention(&x_q, &geo_q, &stage.self_attn)?;
            let updated_p = feature_cross_attention(&x_p, &x_q, &stage.cross_attn)?;
            x_q = feature_cross_attention(&x_q, &updated_p, &stage.cross_attn)?;
            x_p = updated_p;
        }
    }

    let h_p = matmul_acc64(&x_p, &w.w_out);
    let h_q = matmul_acc64(&x_q, &w.w_out);
    for v in h_p.iter().chain(h_q.iter()) {
        if !v.is_finite_real() {
            return Err(Error::Numerical("non-finite feature in stack output".into()));
        }
    }
    Ok((h_p, h_q))
}
