//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written against [`Real`], which bundles the
//! `num-traits` float interface with the field traits the dense linear
//! algebra backend needs. `f64` is the working precision; `f32` compiles
//! and is useful for quick experiments on the grid and material layers.

use std::fmt::{Debug, Display};

use faer::traits::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{Float, FloatConst};

/// Floating point type usable throughout the solver.
pub trait Real:
    Float + FloatConst + RealField<Unit: ComplexField> + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self;

    /// Lossy conversion back to `f64` for reporting.
    fn as_f64(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// `i`, the imaginary unit.
#[inline]
pub(crate) fn imag_unit<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}
