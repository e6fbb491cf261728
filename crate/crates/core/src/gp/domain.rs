use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector<T>(pub Vec<T>);

impl<T: Scalar> ParameterVector<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "parameter vector has non-finite entries".into(),
            ));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// One-norm distance.
    pub fn l1_distance(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (*a - *b).abs())
            .sum()
    }
}

impl<T> Deref for ParameterVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> AsRef<[T]> for ParameterVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

impl<T> From<Vec<T>> for ParameterVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Axis-aligned box discretized into a regular lattice.
///
/// Lattice points are indexed in row-major order: the last coordinate varies
/// fastest, index 0 is the lower corner and the final index is the upper
/// corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    grid_counts: Vec<usize>,
}

impl<T: Scalar> Domain<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, grid_counts: Vec<usize>) -> Result<Self> {
        let d = lower.len();
        if upper.len() != d || grid_counts.len() != d {
            return Err(Error::InvalidDomain(format!(
                "bounds/grid lengths differ: {} {} {}",
                d,
                upper.len(),
                grid_counts.len()
            )));
        }
        if d == 0 {
            return Err(Error::InvalidDomain("zero-dimensional domain".into()));
        }
        for k in 0..d {
            if !(lower[k] < upper[k]) || !lower[k].is_finite() || !upper[k].is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "dimension {k}: lower {} must be below upper {}",
                    lower[k], upper[k]
                )));
            }
            if grid_counts[k] < 2 {
                return Err(Error::InvalidDomain(format!(
                    "dimension {k}: grid count {} < 2",
                    grid_counts[k]
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            grid_counts,
        })
    }

    /// Same count along every axis.
    pub fn uniform(lower: Vec<T>, upper: Vec<T>, count: usize) -> Result<Self> {
        let d = lower.len();
        Self::new(lower, upper, vec![count; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn grid_counts(&self) -> &[usize] {
        &self.grid_counts
    }

    /// Number of lattice points.
    pub fn len(&self) -> usize {
        self.grid_counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis lattice coordinates of a linear index.
    pub fn lattice(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = index % self.grid_counts[k];
            index /= self.grid_counts[k];
        }
        out
    }

    pub fn linear_index(&self, lattice: &[usize]) -> usize {
        lattice
            .iter()
            .zip(&self.grid_counts)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    fn axis_value(&self, k: usize, i: usize) -> T {
        let n = self.grid_counts[k];
        if i + 1 == n {
            return self.upper[k];
        }
        let frac = T::lit(i as f64) / T::lit((n - 1) as f64);
        self.lower[k] + (self.upper[k] - self.lower[k]) * frac
    }

    pub fn point(&self, index: usize) -> ParameterVector<T> {
        let lat = self.lattice(index);
        ParameterVector(
            lat.iter()
                .enumerate()
                .map(|(k, &i)| self.axis_value(k, i))
                .collect(),
        )
    }

    pub fn points(&self) -> Vec<ParameterVector<T>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Index of the lattice point nearest to `coords`.
    pub fn nearest_index(&self, coords: &[T]) -> Result<usize> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        let lat: Vec<usize> = coords
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let n = self.grid_counts[k];
                let span = self.upper[k] - self.lower[k];
                let r = ((c - self.lower[k]) / span * T::lit((n - 1) as f64))
                    .round()
                    .as_f64();
                r.clamp(0.0, (n - 1) as f64) as usize
            })
            .collect();
        Ok(self.linear_index(&lat))
    }

    /// Exact lattice membership (bitwise equal to the generated point).
    pub fn index_of(&self, coords: &[T]) -> Option<usize> {
        let idx = self.nearest_index(coords).ok()?;
        (self.point(idx).coords() == coords).then_some(idx)
    }

    pub fn contains(&self, coords: &[T]) -> bool {
        coords.len() == self.dim()
            && coords
                .iter()
                .enumerate()
                .all(|(k, &c)| c >= self.lower[k] && c <= self.upper[k])
    }
}
