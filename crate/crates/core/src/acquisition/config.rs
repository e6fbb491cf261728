use super::{AlgorithmState, Decision};
use crate::aux_solver::{constrained_argmin, GridTable};
use crate::error::Result;
use crate::gp::Domain;
use crate::scalar::Scalar;

/// Optimistic constrained step on a precomputed table.
///
/// Declares infeasibility when some constraint's lower confidence bound is
/// positive on the whole lattice. Otherwise returns the smallest-index
/// minimizer of the objective's lower confidence bound among points where
/// every constraint's lower confidence bound is non-positive.
pub fn config_select<T: Scalar>(table: &GridTable<T>, domain: &Domain<T>) -> Decision<T> {
    let n = table.len();
    for c in 1..table.n_outputs() {
        let min_lcb = (0..n)
            .map(|i| table.lcb(c, i))
            .fold(T::infinity(), |a, b| a.min(b));
        if min_lcb > T::zero() {
            return Decision::Infeasible;
        }
    }
    let mask = table.optimistic_feasible_mask();
    let scores = table.lcb_column(0);
    match constrained_argmin(&scores, Some(&mask)) {
        Some(i) => Decision::sample(domain, i),
        // every constraint is satisfiable on its own but not jointly, so the
        // auxiliary problem itself is infeasible
        None => Decision::Infeasible,
    }
}

pub fn config_step<T: Scalar>(state: &AlgorithmState<T>) -> Result<Decision<T>> {
    Ok(config_select(&state.grid_table()?, state.domain()))
}
