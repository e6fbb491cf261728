//! Gaussian process regression over a lattice-discretized box.

mod domain;
mod hyper;
mod info_gain;
mod kernel;
mod model;

pub use domain::{Domain, ParameterVector};
pub use hyper::{
    fit_hyperparameters, lengthscale_fractions, noise_fractions, output_scale_factors,
    Hyperparameters, MIN_OBSERVATIONS,
};
pub use info_gain::{
    information_gain, max_info_gain, max_info_gain_detailed, InfoGain, EXHAUSTIVE_BUDGET,
};
pub use kernel::{Kernel, KernelFamily};
pub use model::{GpModel, Observation};
