//! Projection weights for the transformer stack.
//!
//! There is no training here: weights are drawn once from a seeded
//! splitmix64 stream, uniform in `[-1/√d_t, +1/√d_t]`, in a fixed
//! documented order so that outputs are reproducible bit-for-bit from the
//! seed. Normalization gains start at 1, all biases at 0.
//!
//! Generation order: `w_in`, `w_d`, `w_a`, then per stage the
//! self-attention matrices (`wq wk wv wr wo ff.w1 ff.w2`) followed by the
//! cross-attention matrices (`wq wk wv wo ff.w1 ff.w2`), and finally
//! `w_out`.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::Real;
use nalgebra::DMatrix;

/// Layer normalization parameters over the feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm<T: Real> {
    pub gain: DMatrix<T>,
    pub bias: DMatrix<T>,
}

impl<T: Real> LayerNorm<T> {
    fn identity(dim: usize) -> Self {
        Self {
            gain: DMatrix::from_element(1, dim, T::one()),
            bias: DMatrix::zeros(1, dim),
        }
    }
}

/// Two-layer feed-forward block with ReLU, hidden width `2·d_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward<T: Real> {
    pub w1: DMatrix<T>,
    pub b1: DMatrix<T>,
    pub w2: DMatrix<T>,
    pub b2: DMatrix<T>,
}

/// Geometric self-attention layer: queries, keys, values plus the
/// projection applied to the geometric structure embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAttentionLayer<T: Real> {
    pub heads: usize,
    pub wq: DMatrix<T>,
    pub wk: DMatrix<T>,
    pub wv: DMatrix<T>,
    pub wr: DMatrix<T>,
    pub wo: DMatrix<T>,
    pub norm1: LayerNorm<T>,
    pub ff: FeedForward<T>,
    pub norm2: LayerNorm<T>,
}

/// Feature-based cross-attention layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossAttentionLayer<T: Real> {
    pub heads: usize,
    pub wq: DMatrix<T>,
    pub wk: DMatrix<T>,
    pub wv: DMatrix<T>,
    pub wo: DMatrix<T>,
    pub norm1: LayerNorm<T>,
    pub ff: FeedForward<T>,
    pub norm2: LayerNorm<T>,
}

/// One interleaving stage: self-attention (applied to each cloud) then
/// cross-attention (applied in both directions).
#[derive(Debug, Clone, PartialEq)]
pub struct Stage<T: Real> {
    pub self_attn: SelfAttentionLayer<T>,
    pub cross_attn: CrossAttentionLayer<T>,
}

/// All weights of one transformer stack.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights<T: Real> {
    pub dim: usize,
    pub heads: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub w_in: DMatrix<T>,
    pub w_d: DMatrix<T>,
    pub w_a: DMatrix<T>,
    pub w_out: DMatrix<T>,
    pub stages: Vec<Stage<T>>,
}

fn seeded_matrix<T: Real>(rng: &mut SplitMix64, rows: usize, cols: usize, bound: f64) -> DMatrix<T> {
    // column-major fill keeps the draw order tied to the storage order
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = T::from_f64_lossy(rng.uniform(-bound, bound));
        }
    }
    m
}

impl<T: Real> AttentionWeights<T> {
    /// Deterministic weights for a stack of `stages` interleaving rounds.
    pub fn seeded(
        input_dim: usize,
        dim: usize,
        output_dim: usize,
        heads: usize,
        stages: usize,
        seed: u64,
    ) -> Result<Self> {
        if dim == 0 || heads == 0 || dim % heads != 0 {
            return Err(Error::Config(format!(
                "feature dim {dim} must be a positive multiple of head count {heads}"
            )));
        }
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::Config("projection dims must be positive".into()));
        }
        let bound = 1.0 / (dim as f64).sqrt();
        let hidden = 2 * dim;
        let mut rng = SplitMix64::new(seed);
        let w_in = seeded_matrix(&mut rng, input_dim, dim, bound);
        let w_d = seeded_matrix(&mut rng, dim, dim, bound);
        let w_a = seeded_matrix(&mut rng, dim, dim, bound);
        let mut stage_list = Vec::with_capacity(stages);
        for _ in 0..stages {
            let self_attn = SelfAttentionLayer {
                heads,
                wq: seeded_matrix(&mut rng, dim, dim, bound),
                wk: seeded_matrix(&mut rng, dim, dim, bound),
                wv: seeded_matrix(&mut rng, dim, dim, bound),
                wr: seeded_matrix(&mut rng, dim, dim, bound),
                wo: seeded_matrix(&mut rng, dim, dim, bound),
                norm1: LayerNorm::identity(dim),
                ff: FeedForward {
                    w1: seeded_matrix(&mut rng, dim, hidden, bound),
                    b1: DMatrix::zeros(1, hidden),
                    w2: seeded_matrix(&mut rng, hidden, dim, bound),
                    b2: DMatrix::zeros(1, dim),
                },
                norm2: LayerNorm::identity(dim),
            };
            let cross_attn = CrossAttentionLayer {
                heads,
                wq: seeded_matrix(&mut rng, dim, dim, bound),
                wk: seeded_matrix(&mut rng, dim, dim, bound),
                wv: seeded_matrix(&mut rng, dim, dim, bound),
                wo: seeded_matrix(&mut rng, dim, dim, bound),
                norm1: LayerNorm::identity(dim),
                ff: FeedForward {
                    w1: seeded_matrix(&mut rng, dim, hidden, bound),
                    b1: DMatrix::zeros(1, hidden),
                    w2: seeded_matrix(&mut rng, hidden, dim, bound),
                    b2: DMatrix::zeros(1, dim),
                },
                norm2: LayerNorm::identity(dim),
            };
            stage_list.push(Stage {
                self_attn,
                cross_attn,
            });
        }
        let w_out = seeded_matrix(&mut rng, dim, output_dim, bound);
        Ok(Self {
            dim,
            heads,
            input_dim,
            output_dim,
            w_in,
            w_d,
            w_a,
            w_out,
            stages: stage_list,
        })
    }

    /// Canonical `(name, matrix)` listing used by the dump format.
    pub fn named_matrices(&self) -> Vec<(String, &DMatrix<T>)> {
        let mut out: Vec<(String, &DMatrix<T>)> = vec![
            ("w_in".into(), &self.w_in),
            ("w_d".into(), &self.w_d),
            ("w_a".into(), &self.w_a),
        ];
        for (t, stage) in self.stages.iter().enumerate() {
            let s = &stage.self_attn;
            for (suffix, m) in [
                ("wq", &s.wq),
                ("wk", &s.wk),
                ("wv", &s.wv),
                ("wr", &s.wr),
                ("wo", &s.wo),
                ("norm1.gain", &s.norm1.gain),
                ("norm1.bias", &s.norm1.bias),
                ("ff.w1", &s.ff.w1),
                ("ff.b1", &s.ff.b1),
                ("ff.w2", &s.ff.w2),
                ("ff.b2", &s.ff.b2),
                ("norm2.gain", &s.norm2.gain),
                ("norm2.bias", &s.norm2.bias),
            ] {
                out.push((format!("stage{t}.self.{suffix}"), m));
            }
            let c = &stage.cross_attn;
            for (suffix, m) in [
                ("wq", &c.wq),
                ("wk", &c.wk),
                ("wv", &c.wv),
                ("wo", &c.wo),
                ("norm1.gain", &c.norm1.gain),
                ("norm1.bias", &c.norm1.bias),
                ("ff.w1", &c.ff.w1),
                ("ff.b1", &c.ff.b1),
                ("ff.w2", &c.ff.w2),
                ("ff.b2", &c.ff.b2),
                ("norm2.gain", &c.norm2.gain),
                ("norm2.bias", &c.norm2.bias),
            ] {
                out.push((format!("stage{t}.cross.{suffix}"), m));
            }
        }
        out.push(("w_out".into(), &self.w_out));
        out
    }

    /// Rebuilds weights from a named-matrix listing (the dump format),
    /// validating shape consistency against `heads`.
    pub fn from_named(
        matrices: &[(String, DMatrix<T>)],
        stages: usize,
        heads: usize,
    ) -> Result<Self> {
        let lookup = |name: &str| -> Result<DMatrix<T>> {
            matrices
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, m)| m.clone())
                .ok_or_else(|| Error::Parse(format!("weight dump is missing matrix '{name}'")))
        };
        let w_in = lookup("w_in")?;
        let w_d = lookup("w_d")?;
        let w_a = lookup("w_a")?;
        let w_out = lookup("w_out")?;
        let dim = w_d.nrows();
        if dim == 0 || heads == 0 || dim % heads != 0 {
            return Err(Error::Config(format!(
                "feature dim {dim} must be a positive multiple of head count {heads}"
            )));
        }
        if w_in.ncols() != dim || w_d.shape() != (dim, dim) || w_a.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch("inconsistent projection shapes".into()));
        }
        if w_out.nrows() != dim {
            return Err(Error::ShapeMismatch("w_out rows must equal d_t".into()));
        }
        let mut stage_list = Vec::with_capacity(stages);
        for t in 0..stages {
            let self_attn = SelfAttentionLayer {
                heads,
                wq: lookup(&format!("stage{t}.self.wq"))?,
                wk: lookup(&format!("stage{t}.self.wk"))?,
                wv: lookup(&format!("stage{t}.self.wv"))?,
                wr: lookup(&format!("stage{t}.self.wr"))?,
                wo: lookup(&format!("stage{t}.self.wo"))?,
                norm1: LayerNorm {
                    gain: lookup(&format!("stage{t}.self.norm1.gain"))?,
                    bias: lookup(&format!("stage{t}.self.norm1.bias"))?,
                },
                ff: FeedForward {
                    w1: lookup(&format!("stage{t}.self.ff.w1"))?,
                    b1: lookup(&format!("stage{t}.self.ff.b1"))?,
                    w2: lookup(&format!("stage{t}.self.ff.w2"))?,
                    b2: lookup(&format!("stage{t}.self.ff.b2"))?,
                },
                norm2: LayerNorm {
                    gain: lookup(&format!("stage{t}.self.norm2.gain"))?,
                    bias: lookup(&format!("stage{t}.self.norm2.bias"))?,
                },
            };
            let cross_attn = CrossAttentionLayer {
                heads,
                wq: lookup(&format!("stage{t}.cross.wq"))?,
                wk: lookup(&format!("stage{t}.cross.wk"))?,
                wv: lookup(&format!("stage{t}.cross.wv"))?,
                wo: lookup(&format!("stage{t}.cross.wo"))?,
                norm1: LayerNorm {
                    gain: lookup(&format!("stage{t}.cross.norm1.gain"))?,
                    bias: lookup(&format!("stage{t}.cross.norm1.bias"))?,
                },
                ff: FeedForward {
                    w1: lookup(&format!("stage{t}.cross.ff.w1"))?,
                    b1: lookup(&format!("stage{t}.cross.ff.b1"))?,
                    w2: lookup(&format!("stage{t}.cross.ff.w2"))?,
                    b2: lookup(&format!("stage{t}.cross.ff.b2"))?,
                },
                norm2: LayerNorm {
                    gain: lookup(&format!("stage{t}.cross.norm2.gain"))?,
                    bias: lookup(&format!("stage{t}.cross.norm2.bias"))?,
                },
            };
            stage_list.push(Stage {
                self_attn,
                cross_attn,
            });
        }
        Ok(Self {
            dim,
            heads,
            input_dim: w_in.nrows(),
            output_dim: w_out.ncols(),
            w_in,
            w_d,
            w_a,
            w_out,
            stages: stage_list,
        })
    }

    pub fn cast<D: Real>(&self) -> AttentionWeights<D> {
        let named: Vec<(String, DMatrix<D>)> = self
            .named_matrices()
            .into_iter()
            .map(|(n, m)| (n, crate::scalar::cast_matrix(m)))
            .collect();
        AttentionWeights::from_named(&named, self.stages.len(), self.heads)
            .expect("cast preserves shape consistency")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_weights_are_deterministic() {
        let a = AttentionWeights::<f32>::seeded(16, 8, 8, 4, 2, 99).unwrap();
        let b = AttentionWeights::<f32>::seeded(16, 8, 8, 4, 2, 99).unwrap();
        assert_eq!(a, b);
        let c = AttentionWeights::<f32>::seeded(16, 8, 8, 4, 2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bound_respected() {
        let w = AttentionWeights::<f64>::seeded(4, 16, 16, 4, 1, 1).unwrap();
        let bound = 1.0 / 4.0;
        for (_, m) in w.named_matrices() {
            for v in m.iter() {
                assert!(v.abs() <= 1.0_f64.max(bound)); // gains are exactly 1
            }
        }
    }

    #[test]
    fn head_divisibility_enforced() {
        assert!(AttentionWeights::<f32>::seeded(4, 10, 8, 4, 1, 0).is_err());
    }

    #[test]
    fn named_roundtrip() {
        let w = AttentionWeights::<f32>::seeded(6, 8, 12, 2, 3, 7).unwrap();
        let named: Vec<(String, DMatrix<f32>)> = w
            .named_matrices()
            .into_iter()
            .map(|(n, m)| (n, m.clone()))
            .collect();
        let back = AttentionWeights::from_named(&named, 3, 2).unwrap();
        assert_eq!(w, back);
    }
}
