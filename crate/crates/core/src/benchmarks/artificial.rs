//! Two-dimensional trigonometric test problem
//! `min cos(2θ¹)cos(θ²) + sin(θ¹)` s.t. `cos(θ¹ + θ²) − g_thr ≤ 0` on `[−10, 10]²`.

use super::problem::Problem;
use crate::error::{Error, Result};

pub const ARTIFICIAL_BOUND: f64 = 10.0;

/// Threshold of the provably infeasible variant: `g ≥ −1 + 2 = 1`.
pub const INFEASIBLE_THRESHOLD: f64 = -2.0;

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: theta.len(),
        });
    }
    if theta
        .iter()
        .any(|t| !t.is_finite() || t.abs() > ARTIFICIAL_BOUND)
    {
        return Err(Error::OutOfDomain(format!("{theta:?} not in [-10, 10]^2")));
    }
    Ok(())
}

#[inline]
fn raw(theta: &[f64], g_thr: f64) -> (f64, f64) {
    let (a, b) = (theta[0], theta[1]);
    ((2.0 * a).cos() * b.cos() + a.sin(), (a + b).cos() - g_thr)
}

/// Returns `(J, g)`.
pub fn artificial_eval(theta: &[f64], g_thr: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    if !(g_thr > -1.0 && g_thr < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {g_thr} outside (-1, 1)"
        )));
    }
    Ok(raw(theta, g_thr))
}

/// Same objective with the constraint shifted so that no point is feasible.
pub fn artificial_infeasible_eval(theta: &[f64]) -> Result<(f64, f64)> {
    check_theta(theta)?;
    Ok(raw(theta, INFEASIBLE_THRESHOLD))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artificial {
    name: String,
    g_thr: f64,
    infeasible: bool,
    lower: [f64; 2],
    upper: [f64; 2],
}

impl Artificial {
    pub fn new(g_thr: f64) -> Result<Self> {
        artificial_eval(&[0.0, 0.0], g_thr)?;
        Ok(Self {
            name: "artificial".into(),
            g_thr,
            infeasible: false,
            lower: [-ARTIFICIAL_BOUND; 2],
            upper: [ARTIFICIAL_BOUND; 2],
        })
    }

    pub fn infeasible() -> Self {
        Self {
            name: "artificial_infeasible".into(),
            g_thr: INFEASIBLE_THRESHOLD,
            infeasible: true,
            lower: [-ARTIFICIAL_BOUND; 2],
            upper: [ARTIFICIAL_BOUND; 2],
        }
    }

    pub fn g_thr(&self) -> f64 {
        self.g_thr
    }

    /// Pure evaluation `[J, g]`.
    pub fn eval(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let (j, g) = if self.infeasible {
            artificial_infeasible_eval(theta)?
        } else {
            artificial_eval(theta, self.g_thr)?
        };
        Ok(vec![j, g])
    }
}

impl Problem for Artificial {
    fn name(&self) -> &str {
        &self.name
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn n_constraints(&self) -> usize {
        1
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<Vec<f64>> {
        self.eval(theta)
    }
}
