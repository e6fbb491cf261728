//! Maximum information gain `γ_t = max_{|A| = t} ½ log det(I + λ⁻¹ K_A)` over
//! the lattice of a [`Domain`].
//!
//! Subsets are enumerated exhaustively while the number of candidates stays
//! under [`EXHAUSTIVE_BUDGET`]; beyond that size the best exhaustive set is
//! extended greedily by the point of largest posterior variance. The log
//! determinant is monotone submodular, so the greedy part carries the usual
//! `1 − 1/e` guarantee and the returned sequence is non-decreasing in `t`.

use super::domain::{Domain, ParameterVector};
use super::kernel::Kernel;
use super::model::{GpModel, Observation};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::scalar::Scalar;

pub const EXHAUSTIVE_BUDGET: u128 = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct InfoGain<T> {
    pub value: T,
    /// Grid indices of the maximizing set, in selection order.
    pub indices: Vec<usize>,
    /// Number of leading indices chosen by exhaustive search.
    pub exhaustive_size: usize,
}

impl<T> InfoGain<T> {
    pub fn is_exact(&self) -> bool {
        self.exhaustive_size == self.indices.len()
    }
}

/// `½ log det(I + λ⁻¹ K_A)` for an explicit point set.
pub fn information_gain<T: Scalar>(
    kernel: &Kernel<T>,
    points: &[ParameterVector<T>],
    lambda: T,
) -> Result<T> {
    let n = points.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let mut m = kernel.gram(points);
    for x in m.iter_mut() {
        *x = *x / lambda;
    }
    for i in 0..n {
        m[i * n + i] = m[i * n + i] + T::one();
    }
    Ok(Cholesky::factor(&m, n)?.log_det() * T::lit(0.5))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u128::MAX / 1_000_000 {
            return u128::MAX;
        }
    }
    acc
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic
/// order. Returns `false` after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn max_info_gain<T: Scalar>(
    kernel: &Kernel<T>,
    domain: &Domain<T>,
    t: usize,
    lambda: T,
) -> Result<T> {
    Ok(max_info_gain_detailed(kernel, domain, t, lambda)?.value)
}

pub fn max_info_gain_detailed<T: Scalar>(
    kernel: &Kernel<T>,
    domain: &Domain<T>,
    t: usize,
    lambda: T,
) -> Result<InfoGain<T>> {
    let n = domain.len();
    if t > n {
        return Err(Error::InvalidArgument(format!(
            "subset size {t} exceeds grid size {n}"
        )));
    }
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    if kernel.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: kernel.dim(),
        });
    }
    if t == 0 {
        return Ok(InfoGain {
            value: T::zero(),
            indices: Vec::new(),
            exhaustive_size: 0,
        });
    }
    let points = domain.points();

    let mut exhaustive = 0;
    while exhaustive < t && binomial(n, exhaustive + 1) <= EXHAUSTIVE_BUDGET {
        exhaustive += 1;
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(t);
    if exhaustive > 0 {
        let mut idx: Vec<usize> = (0..exhaustive).collect();
        let mut best = T::neg_infinity();
        let mut buf = Vec::with_capacity(exhaustive);
        loop {
            buf.clear();
            buf.extend(idx.iter().map(|&i| points[i].clone()));
            let g = information_gain(kernel, &buf, lambda)?;
            if g > best {
                best = g;
                chosen.clone_from(&idx);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }

    if chosen.len() < t {
        let mut model = GpModel::with_observations(
            kernel.clone(),
            lambda,
            0,
            chosen
                .iter()
                .map(|&i| Observation::new(points[i].clone(), T::zero(), 0)),
        )?;
        let mut taken = vec![false; n];
        for &i in &chosen {
            taken[i] = true;
        }
        while chosen.len() < t {
            let post = model.posterior_batch(&points)?;
            let mut best: Option<(usize, T)> = None;
            for (i, (_, var)) in post.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                if best.is_none_or(|(_, b)| *var > b) {
                    best = Some((i, *var));
                }
            }
            let (i, _) = best.expect("t ≤ n leaves a free point");
            taken[i] = true;
            chosen.push(i);
            model.add_observation(Observation::new(points[i].clone(), T::zero(), 0))?;
        }
    }

    let set: Vec<_> = chosen.iter().map(|&i| points[i].clone()).collect();
    Ok(InfoGain {
        value: information_gain(kernel, &set, lambda)?,
        indices: chosen,
        exhaustive_size: exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn singleton_and_empty() {
        let k = Kernel::squared_exponential(vec![1.0, 1.0], 1.0).unwrap();
        let d = Domain::uniform(vec![0.0, 0.0], vec![1.0, 1.0], 5).unwrap();
        assert_eq!(max_info_gain(&k, &d, 0, 0.01).unwrap(), 0.0);
        let g1 = max_info_gain(&k, &d, 1, 0.01).unwrap();
        assert_relative_eq!(g1, 0.5 * 101f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn two_point_domain_closed_form() {
        let k = Kernel::squared_exponential(vec![1.0], 1.0).unwrap();
        let d = Domain::uniform(vec![0.0], vec![1.0], 2).unwrap();
        let lam = 0.1;
        let c = (-0.5f64).exp() / lam;
        let a = 1.0 + 1.0 / lam;
        let expected = 0.5 * (a * a - c * c).ln();
        assert_relative_eq!(
            max_info_gain(&k, &d, 2, lam).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut idx = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut idx, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
        assert_eq!(binomial(10_000, 2), 49_995_000);
    }

    #[test]
    fn greedy_branch_is_monotone() {
        let k = Kernel::matern52(vec![0.3, 0.3], 1.0).unwrap();
        let d = Domain::uniform(vec![0.0, 0.0], vec![1.0, 1.0], 15).unwrap();
        let mut prev = 0.0;
        for t in 0..8 {
            let g = max_info_gain_detailed(&k, &d, t, 0.05).unwrap();
            assert!(g.value >= prev - 1e-12);
            assert!(t < 3 || !g.is_exact());
            prev = g.value;
        }
        assert!(max_info_gain(&k, &d, 300, 0.05).is_err());
    }
}
