//! Scalar abstraction and compensated accumulation.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the statistics are computed in: `f32` or `f64`.
///
/// Every formula in this crate is written against this trait; the crate root
/// exports `f64` aliases for the common case. Stated accuracy targets
/// (quadrature and root-finding tolerances) assume `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into `R`.
pub(crate) fn cast<R: Real>(value: f64) -> R {
    R::from_f64(value).expect("f64 constant converts to scalar")
}

pub(crate) fn cast_usize<R: Real>(value: usize) -> R {
    R::from_usize(value).expect("usize converts to scalar")
}

pub(crate) fn cast_u64<R: Real>(value: u64) -> R {
    R::from_u64(value).expect("u64 converts to scalar")
}

/// Neumaier-compensated accumulator.
///
/// Sums of `1/p_i^j` over sparse models span many orders of magnitude; a
/// naive sum loses the small terms entirely.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CompensatedSum<R> {
    sum: R,
    compensation: R,
}

impl<R: Real> CompensatedSum<R> {
    pub(crate) fn new() -> Self {
        Self {
            sum: R::zero(),
            compensation: R::zero(),
        }
    }

    pub(crate) fn add(&mut self, term: R) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> R {
        self.sum + self.compensation
    }
}
