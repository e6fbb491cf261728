//! Kernel hyperparameter estimation by exhaustive search of the exact log
//! marginal likelihood over a fixed log-spaced candidate grid.

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::kernel::{Kernel, KernelFamily};
use super::model::{GpModel, Observation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MIN_OBSERVATIONS: usize = 4;

/// Candidate lengthscales as fractions of each axis width: 16 values from
/// 0.01 to 10^0.5, geometrically spaced.
pub fn lengthscale_fractions() -> Vec<f64> {
    log_space(-2.0, 0.5, 16)
}

/// Candidate output scales relative to the root-mean-square of the data.
pub fn output_scale_factors() -> Vec<f64> {
    log_space(-1.0, 1.0, 9)
}

/// Candidate noise variances relative to the mean square of the data.
pub fn noise_fractions() -> Vec<f64> {
    log_space(-6.0, -1.0, 6)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters<T> {
    pub kernel: Kernel<T>,
    pub noise_variance: T,
    pub log_likelihood: T,
}

/// Selects the `(lengthscale, output scale, λ)` candidate with the largest
/// log marginal likelihood. Lengthscales are isotropic in units of the axis
/// widths. Ties keep the first candidate in iteration order
/// (lengthscale outermost, then output scale, then noise).
pub fn fit_hyperparameters<T: Scalar>(
    observations: &[Observation<T>],
    domain: &Domain<T>,
    family: KernelFamily,
) -> Result<Hyperparameters<T>> {
    if observations.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            needed: MIN_OBSERVATIONS,
            got: observations.len(),
        });
    }
    let output = observations[0].output_index;
    let mean_square = observations
        .iter()
        .map(|o| o.value.as_f64().powi(2))
        .sum::<f64>()
        / observations.len() as f64;
    let scale = if mean_square > 0.0 && mean_square.is_finite() {
        mean_square.sqrt()
    } else {
        1.0
    };
    let widths: Vec<f64> = domain
        .lower()
        .iter()
        .zip(domain.upper())
        .map(|(l, u)| (*u - *l).as_f64())
        .collect();

    let mut best: Option<Hyperparameters<T>> = None;
    for frac in lengthscale_fractions() {
        let ls: Vec<T> = widths.iter().map(|w| T::lit(w * frac)).collect();
        for factor in output_scale_factors() {
            let kernel = Kernel::new(family, ls.clone(), T::lit(scale * factor))?;
            for nf in noise_fractions() {
                let noise = T::lit(nf * scale * scale);
                let Ok(model) = GpModel::with_observations(
                    kernel.clone(),
                    noise,
                    output,
                    observations.iter().cloned(),
                ) else {
                    continue;
                };
                let ll = model.log_marginal_likelihood();
                if !ll.is_finite() {
                    continue;
                }
                if best.as_ref().is_none_or(|b| ll > b.log_likelihood) {
                    best = Some(Hyperparameters {
                        kernel: kernel.clone(),
                        noise_variance: noise,
                        log_likelihood: ll,
                    });
                }
            }
        }
    }
    best.ok_or(Error::DegenerateData)
}
