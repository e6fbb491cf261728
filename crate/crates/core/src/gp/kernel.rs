use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
}

/// Stationary ARD kernel `σ² · ρ(r)` with `r` the lengthscale-scaled distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel<T> {
    pub family: KernelFamily,
    pub lengthscales: Vec<T>,
    pub output_scale: T,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(family: KernelFamily, lengthscales: Vec<T>, output_scale: T) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::InvalidArgument("kernel needs lengthscales".into()));
        }
        if lengthscales
            .iter()
            .any(|l| !(*l > T::zero()) || !l.is_finite())
        {
            return Err(Error::InvalidArgument(
                "lengthscales must be positive and finite".into(),
            ));
        }
        if !(output_scale > T::zero()) || !output_scale.is_finite() {
            return Err(Error::InvalidArgument(
                "output scale must be positive and finite".into(),
            ));
        }
        Ok(Self {
            family,
            lengthscales,
            output_scale,
        })
    }

    pub fn squared_exponential(lengthscales: Vec<T>, output_scale: T) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, lengthscales, output_scale)
    }

    pub fn matern52(lengthscales: Vec<T>, output_scale: T) -> Result<Self> {
        Self::new(KernelFamily::Matern52, lengthscales, output_scale)
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Prior variance `k(θ, θ) = σ²`.
    pub fn variance(&self) -> T {
        self.output_scale * self.output_scale
    }

    pub fn eval(&self, a: &[T], b: &[T]) -> Result<T> {
        let d = self.dim();
        if a.len() != d || b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if a.len() != d { a.len() } else { b.len() },
            });
        }
        Ok(self.eval_unchecked(a, b))
    }

    /// Caller guarantees matching dimensions.
    #[inline]
    pub fn eval_unchecked(&self, a: &[T], b: &[T]) -> T {
        let r2: T = a
            .iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| {
                let z = (*x - *y) / *l;
                z * z
            })
            .sum();
        self.variance() * self.profile(r2)
    }

    #[inline]
    fn profile(&self, r2: T) -> T {
        match self.family {
            KernelFamily::SquaredExponential => (-T::lit(0.5) * r2).exp(),
            KernelFamily::Matern52 => {
                let s = (T::lit(5.0) * r2).sqrt();
                (T::one() + s + s * s / T::lit(3.0)) * (-s).exp()
            }
        }
    }

    /// Dense Gram matrix (row-major) of `points` against themselves.
    pub fn gram<P: AsRef<[T]>>(&self, points: &[P]) -> Vec<T> {
        let n = points.len();
        let mut k = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval_unchecked(points[i].as_ref(), points[j].as_ref());
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }
}
