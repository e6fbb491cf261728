use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exploration weight schedule `β^{1/2}_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BetaSchedule {
    Constant {
        value: f64,
    },
    /// `c · sqrt(2 log(|Θ| t² π² / (6δ)))`
    LogGrowth {
        scale: f64,
        delta: f64,
    },
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule::Constant { value: 2.0 }
    }
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaSchedule::Constant { value } if value > 0.0 && value.is_finite() => Ok(()),
            BetaSchedule::LogGrowth { scale, delta }
                if scale > 0.0 && scale.is_finite() && delta > 0.0 && delta < 1.0 =>
            {
                Ok(())
            }
            other => Err(Error::Config(format!("invalid beta schedule {other:?}"))),
        }
    }

    /// Weight at iteration `t ≥ 1` on a lattice of `grid_size` points.
    pub fn beta_sqrt(&self, t: usize, grid_size: usize) -> f64 {
        match *self {
            BetaSchedule::Constant { value } => value,
            BetaSchedule::LogGrowth { scale, delta } => {
                let t = t.max(1) as f64;
                let arg =
                    grid_size.max(1) as f64 * t * t * std::f64::consts::PI.powi(2) / (6.0 * delta);
                scale * (2.0 * arg.ln()).max(0.0).sqrt()
            }
        }
    }
}
