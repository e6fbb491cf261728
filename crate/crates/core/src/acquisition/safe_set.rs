//! Simplified safe-set expansion with a one-norm Lipschitz certificate.
//!
//! A lattice point `θ` joins the safe set when its own pessimistic constraint
//! bounds are non-positive and some member `s` certifies it through
//! `ucb_i(s) + L‖s − θ‖₁ ≤ 0` for every constraint. Points are only ever
//! added, and sampling never leaves the set.

use super::{AlgorithmState, Decision, PolicyState};
use crate::aux_solver::GridTable;
use crate::error::{Error, Result};
use crate::gp::Domain;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SafeSet<T> {
    members: Vec<bool>,
    /// Certifying member for each non-seed member.
    parent: Vec<Option<usize>>,
    seeds: Vec<usize>,
    lipschitz: T,
}

impl<T: Scalar> SafeSet<T> {
    pub fn new(grid_size: usize, seeds: &[usize], lipschitz: T) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::Config("safe set needs at least one seed".into()));
        }
        if let Some(s) = seeds.iter().find(|&&s| s >= grid_size) {
            return Err(Error::Config(format!("seed index {s} outside grid")));
        }
        if !(lipschitz >= T::zero()) {
            return Err(Error::Config(
                "Lipschitz constant must be non-negative".into(),
            ));
        }
        let mut members = vec![false; grid_size];
        for &s in seeds {
            members[s] = true;
        }
        let mut seeds = seeds.to_vec();
        seeds.sort_unstable();
        seeds.dedup();
        Ok(Self {
            members,
            parent: vec![None; grid_size],
            seeds,
            lipschitz,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.get(index).copied().unwrap_or(false)
    }

    pub fn size(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    /// Chain of certifying members from `index` back to a seed, or `None`
    /// when `index` is not a member.
    pub fn certifying_chain(&self, index: usize) -> Option<Vec<usize>> {
        if !self.contains(index) {
            return None;
        }
        let mut chain = vec![index];
        let mut cur = index;
        while let Some(p) = self.parent[cur] {
            chain.push(p);
            cur = p;
        }
        self.seeds.binary_search(&cur).ok().map(|_| chain)
    }

    /// One expansion round against the current posterior table. Only members
    /// present before the call act as certifiers.
    pub fn expand(&mut self, table: &GridTable<T>, domain: &Domain<T>) {
        if self.lipschitz.is_infinite() {
            return;
        }
        let n = table.len();
        let worst_ucb = |i: usize| {
            (1..table.n_outputs())
                .map(|c| table.ucb(c, i))
                .fold(T::neg_infinity(), |a, b| a.max(b))
        };
        let own_ok: Vec<bool> = (0..n).map(|i| worst_ucb(i) <= T::zero()).collect();
        // certifiers in index order with their slack −max_i ucb_i(s) ≥ 0
        let certifiers: Vec<(usize, T)> = (0..n)
            .filter(|&i| self.members[i])
            .map(|i| (i, -worst_ucb(i)))
            .filter(|(_, slack)| *slack >= T::zero())
            .collect();
        if certifiers.is_empty() {
            return;
        }
        let mut added: Vec<(usize, usize)> = Vec::new();
        let mut claimed = vec![false; n];

        if self.lipschitz == T::zero() {
            let root = certifiers[0].0;
            for i in 0..n {
                if !self.members[i] && own_ok[i] {
                    added.push((i, root));
                }
            }
        } else {
            let dim = domain.dim();
            let counts = domain.grid_counts();
            let steps: Vec<T> = (0..dim)
                .map(|k| (domain.upper()[k] - domain.lower()[k]) / T::lit((counts[k] - 1) as f64))
                .collect();
            for &(s, slack) in &certifiers {
                let radius = slack / self.lipschitz;
                let centre = domain.lattice(s);
                let point_s = domain.point(s);
                // bounding box of the one-norm ball in lattice units
                let lo: Vec<usize> = (0..dim)
                    .map(|k| {
                        let r = (radius / steps[k]).floor().as_f64().min(counts[k] as f64) as usize;
                        centre[k].saturating_sub(r)
                    })
                    .collect();
                let hi: Vec<usize> = (0..dim)
                    .map(|k| {
                        let r = (radius / steps[k]).floor().as_f64().min(counts[k] as f64) as usize;
                        (centre[k] + r).min(counts[k] - 1)
                    })
                    .collect();
                let mut cur = lo.clone();
                'scan: loop {
                    let idx = domain.linear_index(&cur);
                    if !self.members[idx] && !claimed[idx] && own_ok[idx] {
                        let dist = point_s.l1_distance(&domain.point(idx));
                        if self.lipschitz * dist <= slack {
                            claimed[idx] = true;
                            added.push((idx, s));
                        }
                    }
                    let mut k = dim;
                    loop {
                        if k == 0 {
                            break 'scan;
                        }
                        k -= 1;
                        if cur[k] < hi[k] {
                            cur[k] += 1;
                            cur[k + 1..].copy_from_slice(&lo[k + 1..]);
                            continue 'scan;
                        }
                    }
                }
            }
        }
        for (i, p) in added {
            self.members[i] = true;
            self.parent[i] = Some(p);
        }
    }
}

/// Expands `safe` and returns the member minimizing the objective's lower
/// confidence bound, ties broken by larger objective σ and then by index.
pub fn safeopt_lite_select<T: Scalar>(
    safe: &mut SafeSet<T>,
    table: &GridTable<T>,
    domain: &Domain<T>,
) -> Decision<T> {
    safe.expand(table, domain);
    let mut best: Option<(usize, T, T)> = None;
    for i in (0..table.len()).filter(|&i| safe.contains(i)) {
        let (l, s) = (table.lcb(0, i), table.std(0, i));
        let better = match best {
            None => true,
            Some((_, bl, bs)) => l < bl || (l == bl && s > bs),
        };
        if better {
            best = Some((i, l, s));
        }
    }
    let (index, _, _) = best.expect("safe set always holds its seeds");
    Decision::sample(domain, index)
}

pub fn safeopt_lite_step<T: Scalar>(state: &mut AlgorithmState<T>) -> Result<Decision<T>> {
    let table = state.grid_table()?;
    let PolicyState::SafeOptLite(safe) = &mut state.policy else {
        return Err(Error::Config(
            "safeopt_lite_step on a non-safe-set state".into(),
        ));
    };
    Ok(safeopt_lite_select(safe, &table, &state.domain))
}
