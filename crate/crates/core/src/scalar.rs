//! Scalar abstraction shared by the numerical core.
//!
//! Everything that only needs real arithmetic (kernels, posteriors, grid
//! scoring, metrics) is written against [`Scalar`] so that it runs in `f32`
//! or `f64`. Problem oracles and the harness are concrete in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Positive part `max(x, 0)`.
    #[inline]
    fn pos(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_part() {
        assert_eq!((-1.5f64).pos(), 0.0);
        assert_eq!(2.5f32.pos(), 2.5);
        assert_eq!(f64::lit(0.25), 0.25);
    }
}
