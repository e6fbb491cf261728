use super::{AlgorithmState, Decision, PolicyState};
use crate::aux_solver::{constrained_argmin, GridTable};
use crate::error::{Error, Result};
use crate::gp::Domain;
use crate::scalar::Scalar;

/// Exact-penalty step: argmin of `lcb_0 + ρ Σ_i [lcb_i]⁺`.
pub fn epbo_select<T: Scalar>(table: &GridTable<T>, domain: &Domain<T>, penalty: T) -> Decision<T> {
    let scores: Vec<T> = (0..table.len())
        .map(|i| {
            let violation: T = (1..table.n_outputs()).map(|c| table.lcb(c, i).pos()).sum();
            table.lcb(0, i) + penalty * violation
        })
        .collect();
    Decision::sample(domain, constrained_argmin(&scores, None).unwrap_or(0))
}

pub fn epbo_step<T: Scalar>(state: &AlgorithmState<T>) -> Result<Decision<T>> {
    let PolicyState::Epbo { penalty } = state.policy() else {
        return Err(Error::Config("epbo_step on a non-EPBO state".into()));
    };
    Ok(epbo_select(&state.grid_table()?, state.domain(), *penalty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_solver::OutputPosterior;

    fn table() -> GridTable<f64> {
        GridTable {
            outputs: vec![
                OutputPosterior {
                    mean: vec![0.0, -3.0, -1.0, -2.0],
                    std: vec![0.0; 4],
                },
                OutputPosterior {
                    mean: vec![-1.0, 2.0, -0.5, 0.1],
                    std: vec![0.0; 4],
                },
            ],
            beta_sqrt: vec![2.0, 2.0],
        }
    }

    #[test]
    fn zero_penalty_ignores_constraints() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 4).unwrap();
        assert_eq!(epbo_select(&table(), &d, 0.0).index(), Some(1));
    }

    #[test]
    fn large_penalty_matches_constrained_argmin() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 4).unwrap();
        assert_eq!(epbo_select(&table(), &d, 1e6).index(), Some(2));
        assert_eq!(super::super::config_select(&table(), &d).index(), Some(2));
        // moderate penalty trades a small violation for objective
        assert_eq!(epbo_select(&table(), &d, 1.0).index(), Some(3));
    }
}
