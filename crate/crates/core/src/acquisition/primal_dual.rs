use super::{AlgorithmState, Decision, PolicyState};
use crate::aux_solver::{constrained_argmin, GridTable};
use crate::error::{Error, Result};
use crate::gp::Domain;
use crate::scalar::Scalar;

/// Lagrangian step: argmin of `lcb_0 + Σ_i λ_i lcb_i`.
pub fn primal_dual_select<T: Scalar>(
    table: &GridTable<T>,
    domain: &Domain<T>,
    duals: &[T],
) -> Decision<T> {
    let scores: Vec<T> = (0..table.len())
        .map(|i| {
            duals
                .iter()
                .enumerate()
                .fold(table.lcb(0, i), |acc, (c, l)| {
                    acc + *l * table.lcb(c + 1, i)
                })
        })
        .collect();
    Decision::sample(domain, constrained_argmin(&scores, None).unwrap_or(0))
}

/// Projected dual ascent `λ_i ← max(0, λ_i + η y_i)`.
pub fn update_duals<T: Scalar>(duals: &[T], constraint_values: &[T], step_size: T) -> Vec<T> {
    duals
        .iter()
        .zip(constraint_values)
        .map(|(l, y)| (*l + step_size * *y).pos())
        .collect()
}

pub fn primal_dual_step<T: Scalar>(state: &AlgorithmState<T>) -> Result<Decision<T>> {
    let PolicyState::PrimalDual { duals, .. } = state.policy() else {
        return Err(Error::Config(
            "primal_dual_step on a non-primal-dual state".into(),
        ));
    };
    Ok(primal_dual_select(
        &state.grid_table()?,
        state.domain(),
        duals,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_solver::OutputPosterior;

    #[test]
    fn dual_projection() {
        assert_eq!(update_duals(&[0.5], &[-1.0], 1.0), vec![0.0]);
        assert!((update_duals(&[0.5f64], &[0.2], 1.0)[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn zero_duals_ignore_constraints() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 3).unwrap();
        let t = GridTable {
            outputs: vec![
                OutputPosterior {
                    mean: vec![1.0, -1.0, 0.0],
                    std: vec![0.0; 3],
                },
                OutputPosterior {
                    mean: vec![-1.0, 5.0, -1.0],
                    std: vec![0.0; 3],
                },
            ],
            beta_sqrt: vec![1.0, 1.0],
        };
        assert_eq!(primal_dual_select(&t, &d, &[0.0]).index(), Some(1));
        assert_eq!(primal_dual_select(&t, &d, &[1.0]).index(), Some(2));
    }
}
