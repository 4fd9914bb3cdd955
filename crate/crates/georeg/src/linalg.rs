//! Small dense kernels with double-precision accumulation.
//!
//! Attention and embedding math may run in `f32`, but every reduction
//! (dot products, softmax sums, norms) accumulates in `f64` with a fixed
//! sequential order, keeping results independent of any parallel schedule.

use crate::scalar::Real;
use nalgebra::DMatrix;

/// `a * b` with each dot product accumulated in `f64`.
pub(crate) fn matmul_acc64<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "matmul dimension mismatch");
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = DMatrix::<T>::zeros(n, m);
    let mut row = vec![0.0f64; k];
    for i in 0..n {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = a[(i, c)].to_f64_lossy();
        }
        for j in 0..m {
            let mut acc = 0.0f64;
            for (c, &av) in row.iter().enumerate() {
                acc += av * b[(c, j)].to_f64_lossy();
            }
            out[(i, j)] = T::from_f64_lossy(acc);
        }
    }
    out
}

/// Row-vector times matrix with `f64` accumulation: `v (1×k) * b (k×m)`.
pub(crate) fn vecmat_acc64<T: Real>(v: &[T], b: &DMatrix<T>, out: &mut [T]) {
    assert_eq!(v.len(), b.nrows());
    assert_eq!(out.len(), b.ncols());
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0f64;
        for (c, &vv) in v.iter().enumerate() {
            acc += vv.to_f64_lossy() * b[(c, j)].to_f64_lossy();
        }
        *slot = T::from_f64_lossy(acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::testutil::random_matrix;

    #[test]
    fn agrees_with_nalgebra_in_f64() {
        let mut rng = SplitMix64::new(8);
        let a = random_matrix(&mut rng, 7, 5);
        let b = random_matrix(&mut rng, 5, 9);
        let got = matmul_acc64(&a, &b);
        let expect = &a * &b;
        assert!((got - expect).abs().max() < 1e-13);
    }

    #[test]
    fn vecmat_matches_matmul() {
        let mut rng = SplitMix64::new(9);
        let a = random_matrix(&mut rng, 1, 6);
        let b = random_matrix(&mut rng, 6, 4);
        let mut out = vec![0.0f64; 4];
        vecmat_acc64(a.row(0).transpose().as_slice(), &b, &mut out);
        let expect = matmul_acc64(&a, &b);
        for j in 0..4 {
            assert!((out[j] - expect[(0, j)]).abs() < 1e-15);
        }
    }
}
