use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point types the solvers can run in: `f32` or `f64`.
///
/// Every numerical routine in the crate is written against this trait so the
/// same code path serves single and double precision. Tolerances quoted in the
/// documentation are the double-precision defaults.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the working precision.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in working precision")
    }

    /// Converts an index or count into the working precision.
    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in working precision")
    }

    /// Lossy conversion to `f64`, used for error payloads and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Dense LU factors with partial pivoting, held in the backend's own type.
    type Lu: Clone + Debug + Send + Sync;

    /// Factors the `n x n` row-major matrix `rows`.
    fn lu_factor(n: usize, rows: &[Self]) -> Self::Lu;

    /// Diagonal of the `U` factor.
    fn lu_pivots(lu: &Self::Lu) -> Vec<Self>;

    fn lu_solve(lu: &Self::Lu, b: &[Self]) -> Option<Vec<Self>>;
}

// Implemented per type: with `RealField` as a supertrait every generic
// `x.abs()` would clash with `Float::abs`.
macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Lu = nalgebra::LU<$t, nalgebra::Dyn, nalgebra::Dyn>;

            fn lu_factor(n: usize, rows: &[$t]) -> Self::Lu {
                nalgebra::DMatrix::from_row_slice(n, n, rows).lu()
            }

            fn lu_pivots(lu: &Self::Lu) -> Vec<$t> {
                lu.u().diagonal().iter().copied().collect()
            }

            fn lu_solve(lu: &Self::Lu, b: &[$t]) -> Option<Vec<$t>> {
                let x = lu.solve(&nalgebra::DVector::from_column_slice(b))?;
                Some(x.as_slice().to_vec())
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
