//! Constrained efficient global optimization.
//!
//! Gaussian-process surrogates are fitted independently to an objective and
//! to each constraint. Each acquisition policy turns the current posteriors
//! into the next lattice point to evaluate:
//!
//! * [`acquisition::config_step`] minimizes the objective's lower confidence
//!   bound over the set where every constraint's lower confidence bound is
//!   non-positive, and declares the problem infeasible when that set is empty;
//! * constrained expected improvement, an exact-penalty method, a primal-dual
//!   method, a Lipschitz safe-set method and uniform random search serve as
//!   baselines.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the
//! benchmark problems and the experiment harness work in `f64`. Concrete
//! `f64` aliases are exported at the crate root.

// `!(x >= 0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod aux_solver;
pub mod benchmarks;
pub mod error;
pub mod gp;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Domain64 = gp::Domain<f64>;
pub type ParameterVector64 = gp::ParameterVector<f64>;
pub type Kernel64 = gp::Kernel<f64>;
pub type GpModel64 = gp::GpModel<f64>;
pub type Observation64 = gp::Observation<f64>;
pub type GridTable64 = aux_solver::GridTable<f64>;
pub type AlgorithmState64 = acquisition::AlgorithmState<f64>;
pub type Decision64 = acquisition::Decision<f64>;

pub type Domain32 = gp::Domain<f32>;
pub type GpModel32 = gp::GpModel<f32>;
pub type AlgorithmState32 = acquisition::AlgorithmState<f32>;
