//! Acquisition policies.
//!
//! Each policy maps the current posteriors (one [`GpModel`] per output, the
//! objective first) to the next lattice point, or, for CONFIG, to a
//! declaration that the problem is infeasible. Selection is exhaustive over
//! the lattice and deterministic given the state.

mod beta;
mod cei;
mod config;
mod penalty;
mod primal_dual;
mod random;
mod safe_set;

pub use beta::BetaSchedule;
pub use cei::{cei_select, cei_step, expected_improvement, feasibility_probability, normal_cdf};
pub use config::{config_select, config_step};
pub use penalty::{epbo_select, epbo_step};
pub use primal_dual::{primal_dual_select, primal_dual_step, update_duals};
pub use random::random_step;
pub use safe_set::{safeopt_lite_select, safeopt_lite_step, SafeSet};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aux_solver::{evaluate_grid, GridTable};
use crate::error::{Error, Result};
use crate::gp::{Domain, GpModel, Observation, ParameterVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Decision<T> {
    Sample {
        index: usize,
        theta: ParameterVector<T>,
    },
    Infeasible,
}

impl<T: Scalar> Decision<T> {
    pub fn sample(domain: &Domain<T>, index: usize) -> Self {
        Decision::Sample {
            index,
            theta: domain.point(index),
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Decision::Sample { index, .. } => Some(*index),
            Decision::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Decision::Infeasible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Config,
    Cei,
    Epbo,
    PrimalDual,
    SafeOptLite,
    Random,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Config => "config",
            PolicyKind::Cei => "cei",
            PolicyKind::Epbo => "epbo",
            PolicyKind::PrimalDual => "primal_dual",
            PolicyKind::SafeOptLite => "safe_opt_lite",
            PolicyKind::Random => "random",
        }
    }
}

/// Policy-specific mutable state.
#[derive(Debug, Clone)]
pub enum PolicyState<T> {
    Config,
    Cei,
    Epbo { penalty: T },
    PrimalDual { duals: Vec<T>, step_size: T },
    SafeOptLite(SafeSet<T>),
    Random(ChaCha8Rng),
}

impl<T> PolicyState<T> {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyState::Config => PolicyKind::Config,
            PolicyState::Cei => PolicyKind::Cei,
            PolicyState::Epbo { .. } => PolicyKind::Epbo,
            PolicyState::PrimalDual { .. } => PolicyKind::PrimalDual,
            PolicyState::SafeOptLite(_) => PolicyKind::SafeOptLite,
            PolicyState::Random(_) => PolicyKind::Random,
        }
    }
}

/// Everything a policy carries between iterations.
#[derive(Debug, Clone)]
pub struct AlgorithmState<T> {
    domain: Domain<T>,
    models: Vec<GpModel<T>>,
    beta: BetaSchedule,
    step: usize,
    policy: PolicyState<T>,
}

impl<T: Scalar> AlgorithmState<T> {
    /// `models[0]` is the objective, `models[i]` constraint `i`.
    pub fn new(
        domain: Domain<T>,
        models: Vec<GpModel<T>>,
        beta: BetaSchedule,
        policy: PolicyState<T>,
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Config(
                "at least the objective model is required".into(),
            ));
        }
        for (i, m) in models.iter().enumerate() {
            if m.output_index() != i {
                return Err(Error::Config(format!(
                    "model {i} has output index {}",
                    m.output_index()
                )));
            }
            if m.kernel().dim() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    got: m.kernel().dim(),
                });
            }
        }
        beta.validate()?;
        let n_constraints = models.len() - 1;
        match &policy {
            PolicyState::Epbo { penalty } if !(*penalty >= T::zero()) => {
                return Err(Error::Config("EPBO penalty must be non-negative".into()));
            }
            PolicyState::PrimalDual { duals, step_size } => {
                if duals.len() != n_constraints {
                    return Err(Error::Config(format!(
                        "{} duals for {n_constraints} constraints",
                        duals.len()
                    )));
                }
                if duals.iter().any(|d| !(*d >= T::zero())) {
                    return Err(Error::Config("duals must be non-negative".into()));
                }
                if !(*step_size > T::zero()) {
                    return Err(Error::Config("dual step size must be positive".into()));
                }
            }
            PolicyState::SafeOptLite(safe) if safe.len() != domain.len() => {
                return Err(Error::Config("safe set built for a different grid".into()));
            }
            _ => {}
        }
        Ok(Self {
            domain,
            models,
            beta,
            step: 0,
            policy,
        })
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn models(&self) -> &[GpModel<T>] {
        &self.models
    }

    pub fn models_mut(&mut self) -> &mut [GpModel<T>] {
        &mut self.models
    }

    pub fn n_constraints(&self) -> usize {
        self.models.len() - 1
    }

    /// Number of observations absorbed so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn policy(&self) -> &PolicyState<T> {
        &self.policy
    }

    pub fn kind(&self) -> PolicyKind {
        self.policy.kind()
    }

    pub fn beta(&self) -> &BetaSchedule {
        &self.beta
    }

    /// `β^{1/2}` for every output at the upcoming iteration.
    pub fn beta_sqrt(&self) -> Vec<T> {
        let b = T::lit(self.beta.beta_sqrt(self.step + 1, self.domain.len()));
        vec![b; self.models.len()]
    }

    pub fn grid_table(&self) -> Result<GridTable<T>> {
        evaluate_grid(&self.models, &self.beta_sqrt(), &self.domain)
    }

    /// Runs the configured policy once.
    pub fn next_decision(&mut self) -> Result<Decision<T>> {
        match self.policy.kind() {
            PolicyKind::Config => config_step(self),
            PolicyKind::Cei => cei_step(self),
            PolicyKind::Epbo => epbo_step(self),
            PolicyKind::PrimalDual => primal_dual_step(self),
            PolicyKind::SafeOptLite => safeopt_lite_step(self),
            PolicyKind::Random => {
                let PolicyState::Random(rng) = &mut self.policy else {
                    unreachable!()
                };
                Ok(random_step(&self.domain, rng))
            }
        }
    }

    /// Absorbs the measurements `values = [y_0, y_1, …, y_N]` taken at `theta`.
    pub fn observe(&mut self, theta: &ParameterVector<T>, values: &[T]) -> Result<()> {
        if values.len() != self.models.len() {
            return Err(Error::DimensionMismatch {
                expected: self.models.len(),
                got: values.len(),
            });
        }
        let mut updated = self.models.clone();
        for (i, (m, y)) in updated.iter_mut().zip(values).enumerate() {
            m.add_observation(Observation::new(theta.clone(), *y, i))?;
        }
        self.models = updated;
        self.step += 1;
        if let PolicyState::PrimalDual { duals, step_size } = &mut self.policy {
            *duals = update_duals(duals, &values[1..], *step_size);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Kernel;

    fn models(n: usize) -> Vec<GpModel<f64>> {
        (0..n)
            .map(|i| {
                GpModel::new(
                    Kernel::squared_exponential(vec![1.0], 1.0).unwrap(),
                    0.01,
                    i,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn state_validation() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 5).unwrap();
        let beta = BetaSchedule::default();
        assert!(AlgorithmState::new(d.clone(), vec![], beta, PolicyState::Config).is_err());
        assert!(AlgorithmState::new(
            d.clone(),
            models(2),
            beta,
            PolicyState::PrimalDual {
                duals: vec![],
                step_size: 1.0
            }
        )
        .is_err());
        assert!(AlgorithmState::new(
            d.clone(),
            models(2),
            beta,
            PolicyState::PrimalDual {
                duals: vec![-1.0],
                step_size: 1.0
            }
        )
        .is_err());
        let mut s = AlgorithmState::new(d, models(2), beta, PolicyState::Config).unwrap();
        assert!(s.observe(&ParameterVector(vec![0.5]), &[1.0]).is_err());
        s.observe(&ParameterVector(vec![0.5]), &[1.0, -1.0])
            .unwrap();
        assert_eq!(s.step(), 1);
        assert!(s.models().iter().all(|m| m.len() == 1));
    }

    #[test]
    fn observe_updates_duals() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 5).unwrap();
        let mut s = AlgorithmState::new(
            d,
            models(3),
            BetaSchedule::default(),
            PolicyState::PrimalDual {
                duals: vec![0.5, 0.5],
                step_size: 1.0,
            },
        )
        .unwrap();
        s.observe(&ParameterVector(vec![0.25]), &[0.0, -1.0, 0.2])
            .unwrap();
        let PolicyState::PrimalDual { duals, .. } = s.policy() else {
            panic!()
        };
        assert_eq!(duals[0], 0.0);
        assert!((duals[1] - 0.7).abs() < 1e-15);
    }
}
