//! Constrained expected improvement: `EI(θ) · Π_i Pr[g_i(θ) ≤ 0]`.

use statrs::function::erf::erfc;

use super::{AlgorithmState, Decision};
use crate::aux_solver::{constrained_argmax, GridTable};
use crate::error::{Error, Result};
use crate::gp::Domain;
use crate::scalar::Scalar;

/// Minimum posterior feasibility probability for an observed point to serve
/// as the incumbent.
pub const INCUMBENT_FEASIBILITY: f64 = 0.5;

pub fn normal_cdf<T: Scalar>(z: T) -> T {
    T::lit(0.5 * erfc(-z.as_f64() / std::f64::consts::SQRT_2))
}

fn normal_pdf<T: Scalar>(z: T) -> T {
    let inv_sqrt_2pi = T::lit(1.0 / (2.0 * std::f64::consts::PI).sqrt());
    inv_sqrt_2pi * (-T::lit(0.5) * z * z).exp()
}

/// Expected improvement below `best` of a Gaussian `N(mean, std²)`.
pub fn expected_improvement<T: Scalar>(mean: T, std: T, best: T) -> T {
    let gap = best - mean;
    if std <= T::zero() {
        return gap.pos();
    }
    let z = gap / std;
    (gap * normal_cdf(z) + std * normal_pdf(z)).max(T::zero())
}

/// `Pr[g ≤ 0]` for `g ~ N(mean, std²)`.
pub fn feasibility_probability<T: Scalar>(mean: T, std: T) -> T {
    if std <= T::zero() {
        return if mean <= T::zero() {
            T::one()
        } else {
            T::zero()
        };
    }
    normal_cdf(-mean / std)
}

/// Grid argmax of constrained EI given an incumbent value. With no incumbent
/// the feasibility probability alone is maximized.
pub fn cei_select<T: Scalar>(
    table: &GridTable<T>,
    domain: &Domain<T>,
    incumbent: Option<T>,
) -> Decision<T> {
    let scores: Vec<T> = (0..table.len())
        .map(|i| {
            let pf = (1..table.n_outputs())
                .map(|c| feasibility_probability(table.mean(c, i), table.std(c, i)))
                .fold(T::one(), |a, b| a * b);
            match incumbent {
                Some(best) => expected_improvement(table.mean(0, i), table.std(0, i), best) * pf,
                None => pf,
            }
        })
        .collect();
    let index = constrained_argmax(&scores, None).unwrap_or(0);
    Decision::sample(domain, index)
}

/// Best observed objective value among observed points whose posterior
/// probability of satisfying every constraint is at least
/// [`INCUMBENT_FEASIBILITY`].
pub fn incumbent<T: Scalar>(state: &AlgorithmState<T>) -> Result<Option<T>> {
    let models = state.models();
    let objective = &models[0];
    let mut best: Option<T> = None;
    for (p, y) in objective.points().iter().zip(objective.values()) {
        let mut pf = T::one();
        for m in &models[1..] {
            let (mu, var) = m.posterior(p)?;
            pf = pf * feasibility_probability(mu, var.sqrt());
        }
        if pf >= T::lit(INCUMBENT_FEASIBILITY) && best.is_none_or(|b| *y < b) {
            best = Some(*y);
        }
    }
    Ok(best)
}

pub fn cei_step<T: Scalar>(state: &AlgorithmState<T>) -> Result<Decision<T>> {
    if state.models()[0].is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let best = incumbent(state)?;
    Ok(cei_select(&state.grid_table()?, state.domain(), best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{BetaSchedule, PolicyState};
    use crate::aux_solver::OutputPosterior;
    use crate::gp::{GpModel, Kernel};
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        assert_relative_eq!(normal_cdf(0.0f64), 0.5);
        assert_relative_eq!(normal_cdf(1.959963984540054f64), 0.975, epsilon = 1e-10);
        assert_eq!(expected_improvement(1.0, 0.0, 0.5), 0.0);
        assert_eq!(expected_improvement(0.0, 0.0, 0.5), 0.5);
        // EI at mean == best is σ φ(0)
        assert_relative_eq!(
            expected_improvement(0.0f64, 2.0, 0.0),
            2.0 / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(feasibility_probability(0.1, 0.0), 0.0);
        assert_eq!(feasibility_probability(-0.1, 0.0), 1.0);
    }

    #[test]
    fn feasibility_factor_breaks_equal_ei() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 2).unwrap();
        // b first so that index order would favour it
        let table = GridTable {
            outputs: vec![
                OutputPosterior {
                    mean: vec![0.0, 0.0],
                    std: vec![1.0, 1.0],
                },
                OutputPosterior {
                    mean: vec![0.3, -0.3],
                    std: vec![0.1, 0.1],
                },
            ],
            beta_sqrt: vec![2.0, 2.0],
        };
        let d0 = cei_select(&table, &d, Some(0.0));
        assert_eq!(d0.index(), Some(1));
        let pa = feasibility_probability(-0.3, 0.1);
        let pb = feasibility_probability(0.3, 0.1);
        assert!(pa > 0.998 && pb < 0.002);
    }

    #[test]
    fn requires_an_objective_observation() {
        let d = Domain::uniform(vec![0.0], vec![1.0], 3).unwrap();
        let m = GpModel::new(
            Kernel::squared_exponential(vec![1.0], 1.0).unwrap(),
            0.01,
            0,
        )
        .unwrap();
        let s = AlgorithmState::new(d, vec![m], BetaSchedule::default(), PolicyState::Cei).unwrap();
        assert!(cei_step(&s).is_err());
    }
}
