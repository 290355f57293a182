//! Scalar abstraction shared by the numerical core.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating point type the solver can run on: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for structural checks (mean-zero input,
    /// Hermitian residue). Never tighter than `floor`, but widened for
    /// short mantissas.
    fn structural_tol(floor: f64) -> Self {
        let widened = 1.0e3 * Self::epsilon().to_f64_lossy();
        Self::lit(floor.max(widened))
    }
}

impl Real for f32 {}
impl Real for f64 {}
