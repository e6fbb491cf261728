//! Exhaustive lattice solver for the per-step surrogate problems.
//!
//! Every policy scores all lattice points from cached posteriors and picks the
//! best admissible one. Ties always resolve to the smallest linear index.

use crate::error::{Error, Result};
use crate::gp::{Domain, GpModel, ParameterVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPosterior<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

/// Posterior of every output at every lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable<T> {
    pub outputs: Vec<OutputPosterior<T>>,
    pub beta_sqrt: Vec<T>,
}

/// One lattice row of a [`GridTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridEvaluation<T> {
    pub index: usize,
    pub theta: ParameterVector<T>,
    /// `(mean, σ)` per output.
    pub posterior: Vec<(T, T)>,
    pub lcb: Vec<T>,
    pub ucb: Vec<T>,
}

impl<T: Scalar> GridTable<T> {
    pub fn len(&self) -> usize {
        self.outputs.first().map_or(0, |o| o.mean.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Number of constraints (outputs after the objective).
    pub fn n_constraints(&self) -> usize {
        self.outputs.len().saturating_sub(1)
    }

    #[inline]
    pub fn mean(&self, output: usize, index: usize) -> T {
        self.outputs[output].mean[index]
    }

    #[inline]
    pub fn std(&self, output: usize, index: usize) -> T {
        self.outputs[output].std[index]
    }

    #[inline]
    pub fn lcb(&self, output: usize, index: usize) -> T {
        self.mean(output, index) - self.beta_sqrt[output] * self.std(output, index)
    }

    #[inline]
    pub fn ucb(&self, output: usize, index: usize) -> T {
        self.mean(output, index) + self.beta_sqrt[output] * self.std(output, index)
    }

    pub fn lcb_column(&self, output: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.lcb(output, i)).collect()
    }

    /// `true` where every constraint's lower confidence bound is `≤ 0`.
    pub fn optimistic_feasible_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| (1..self.n_outputs()).all(|c| self.lcb(c, i) <= T::zero()))
            .collect()
    }

    pub fn row(&self, domain: &Domain<T>, index: usize) -> GridEvaluation<T> {
        GridEvaluation {
            index,
            theta: domain.point(index),
            posterior: (0..self.n_outputs())
                .map(|o| (self.mean(o, index), self.std(o, index)))
                .collect(),
            lcb: (0..self.n_outputs()).map(|o| self.lcb(o, index)).collect(),
            ucb: (0..self.n_outputs()).map(|o| self.ucb(o, index)).collect(),
        }
    }
}

/// Posterior table for `models` over every lattice point of `domain`.
pub fn evaluate_grid<T: Scalar>(
    models: &[GpModel<T>],
    beta_sqrt: &[T],
    domain: &Domain<T>,
) -> Result<GridTable<T>> {
    evaluate_points(models, beta_sqrt, &domain.points())
}

pub fn evaluate_points<T: Scalar>(
    models: &[GpModel<T>],
    beta_sqrt: &[T],
    points: &[ParameterVector<T>],
) -> Result<GridTable<T>> {
    if beta_sqrt.len() != models.len() {
        return Err(Error::DimensionMismatch {
            expected: models.len(),
            got: beta_sqrt.len(),
        });
    }
    if let Some(b) = beta_sqrt.iter().find(|b| !(**b >= T::zero())) {
        return Err(Error::InvalidArgument(format!("negative beta_sqrt {b}")));
    }
    let outputs = models
        .iter()
        .map(|m| {
            let post = m.posterior_batch(points)?;
            let (mean, std) = post.into_iter().map(|(mu, var)| (mu, var.sqrt())).unzip();
            Ok(OutputPosterior { mean, std })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridTable {
        outputs,
        beta_sqrt: beta_sqrt.to_vec(),
    })
}

/// Smallest-index minimizer of `scores` over unmasked entries. NaN scores are
/// never selected. `None` when nothing is admissible.
pub fn constrained_argmin<T: Scalar>(scores: &[T], mask: Option<&[bool]>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) || s.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Smallest-index maximizer, same conventions as [`constrained_argmin`].
pub fn constrained_argmax<T: Scalar>(scores: &[T], mask: Option<&[bool]>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) || s.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}
