//! Scalar abstraction for the numeric core.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable throughout the numeric core: `f32` or `f64`.
///
/// `nalgebra::RealField` supplies the transcendental functions; the
/// `num_traits` conversions bridge to `f64` where accumulation happens in
/// double precision regardless of the working scalar.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Lossy conversion from `f64`, used for constants and cast-downs.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }

    /// Widening conversion to `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// True when the value is neither NaN nor infinite.
    fn is_finite_real(self) -> bool {
        self.to_f64_lossy().is_finite()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Casts a matrix entry-wise between scalar types.
pub fn cast_matrix<S: Real, D: Real>(m: &nalgebra::DMatrix<S>) -> nalgebra::DMatrix<D> {
    nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        D::from_f64_lossy(m[(i, j)].to_f64_lossy())
    })
}
