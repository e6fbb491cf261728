//! Convergence and solution-quality metrics over run logs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::Domain;
use crate::scalar::Scalar;

/// Seed used for the σ normalizer samples unless configured otherwise.
pub const SIGMA_SEED: u64 = 0x5eed_0001;
pub const SIGMA_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Sample,
    Infeasible,
}

/// One line of a run log.
///
/// `Infeasible` records mark a declaration and carry no measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub t: usize,
    pub theta: Vec<f64>,
    /// Measured `[y_0, …, y_N]`.
    pub y: Vec<f64>,
    /// Noise-free `[J, g_1, …, g_N]`, when the problem is pure.
    #[serde(rename = "true")]
    pub truth: Option<Vec<f64>>,
    pub decision: RecordKind,
}

impl RunRecord {
    pub fn sample(t: usize, theta: Vec<f64>, y: Vec<f64>, truth: Option<Vec<f64>>) -> Self {
        Self {
            t,
            theta,
            y,
            truth,
            decision: RecordKind::Sample,
        }
    }

    pub fn infeasible(t: usize) -> Self {
        Self {
            t,
            theta: vec![],
            y: vec![],
            truth: None,
            decision: RecordKind::Infeasible,
        }
    }

    pub fn is_sample(&self) -> bool {
        self.decision == RecordKind::Sample
    }
}

/// Which values a metric was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    True,
    Measured,
}

impl ValueSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueSource::True => "true",
            ValueSource::Measured => "measured",
        }
    }
}

/// Noise-free values when every sample record has them, measured values
/// otherwise.
pub fn value_source(records: &[RunRecord]) -> ValueSource {
    if records
        .iter()
        .filter(|r| r.is_sample())
        .all(|r| r.truth.is_some())
    {
        ValueSource::True
    } else {
        ValueSource::Measured
    }
}

fn values(record: &RunRecord, source: ValueSource) -> Result<&[f64]> {
    match source {
        ValueSource::True => record
            .truth
            .as_deref()
            .ok_or(Error::MissingTrueValues(record.t)),
        ValueSource::Measured => Ok(&record.y),
    }
}

fn pos<T: Scalar>(x: T) -> T {
    x.max(T::zero())
}

/// `[J − J*]⁺ + Σ_i [g_i]⁺` for one output vector `[J, g_1, …]`.
pub fn regret_term<T: Scalar>(values: &[T], j_star: T) -> T {
    pos(values[0] - j_star) + values[1..].iter().map(|g| pos(*g)).sum::<T>()
}

/// Constrained regret of a prefix: the best [`regret_term`] over its sample
/// records, using noise-free values. `+∞` when the prefix holds no samples.
pub fn constrained_regret(records: &[RunRecord], j_star: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for r in records.iter().filter(|r| r.is_sample()) {
        best = best.min(regret_term(values(r, ValueSource::True)?, j_star));
    }
    Ok(best)
}

/// Per-record constrained regret of every prefix, one entry per record.
pub fn constrained_regret_series(records: &[RunRecord], j_star: f64) -> Result<Vec<f64>> {
    regret_series(records, j_star, ValueSource::True)
}

/// [`constrained_regret_series`] over the chosen values.
pub fn regret_series(records: &[RunRecord], j_star: f64, source: ValueSource) -> Result<Vec<f64>> {
    let terms = records
        .iter()
        .map(|r| {
            if r.is_sample() {
                values(r, source).map(|v| regret_term(v, j_star))
            } else {
                Ok(f64::INFINITY)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(best_so_far_series(&terms))
}

/// Normalized regret plus violation.
///
/// With `j_star` given: `[J − J*]⁺/σ_J + Σ_i [g_i]⁺/σ_i`. Without it the
/// objective enters raw: `J/σ_J + Σ_i [g_i]⁺/σ_i`.
pub fn normalized_regret_violation<T: Scalar>(
    values: &[T],
    j_star: Option<T>,
    sigmas: &[T],
) -> Result<T> {
    if values.len() != sigmas.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: sigmas.len(),
        });
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s > T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "sigma {s} must be positive"
        )));
    }
    let head = match j_star {
        Some(j) => pos(values[0] - j),
        None => values[0],
    };
    Ok(head / sigmas[0]
        + values[1..]
            .iter()
            .zip(&sigmas[1..])
            .map(|(g, s)| pos(*g) / *s)
            .sum::<T>())
}

/// [`normalized_regret_violation`] of every record, infeasible markers
/// scoring `+∞`.
pub fn normalized_series(
    records: &[RunRecord],
    j_star: Option<f64>,
    sigmas: &[f64],
    source: ValueSource,
) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            if r.is_sample() {
                normalized_regret_violation(values(r, source)?, j_star, sigmas)
            } else {
                Ok(f64::INFINITY)
            }
        })
        .collect()
}

/// Running minimum.
pub fn best_so_far_series<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(values.len());
    let mut best = T::infinity();
    for &v in values {
        if v < best {
            best = v;
        }
        out.push(best);
    }
    out
}

/// `Σ_t [g_i(θ_t)]⁺` for each constraint.
pub fn cumulative_violation(records: &[RunRecord], source: ValueSource) -> Result<Vec<f64>> {
    let mut total: Vec<f64> = Vec::new();
    for r in records.iter().filter(|r| r.is_sample()) {
        let v = values(r, source)?;
        if total.is_empty() {
            total = vec![0.0; v.len().saturating_sub(1)];
        }
        for (acc, g) in total.iter_mut().zip(&v[1..]) {
            *acc += pos(*g);
        }
    }
    Ok(total)
}

/// Sample standard deviation of each output over `samples` lattice points
/// drawn uniformly with `seed`.
pub fn sigma_normalizers<F>(
    domain: &Domain<f64>,
    samples: usize,
    seed: u64,
    eval: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if samples < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for _ in 0..samples {
        let idx = rng.random_range(0..domain.len());
        let v = eval(&domain.point(idx))?;
        if columns.is_empty() {
            columns = vec![Vec::with_capacity(samples); v.len()];
        }
        for (c, x) in columns.iter_mut().zip(v) {
            c.push(x);
        }
    }
    Ok(columns.iter().map(|c| sample_std(c)).collect())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard deviation with the `n − 1` denominator; zero for fewer than two
/// values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
