//! Williams-Otto continuous stirred-tank reactor at steady state.
//!
//! Reactions on mass fractions (relative molar masses A = B = P = 100,
//! C = E = 200, G = 300):
//!
//! ```text
//! A + B → C        r₁ = k₁ X_A X_B
//! B + C → P + E    r₂ = k₂ X_B X_C
//! C + P → G        r₃ = k₃ X_C X_P
//! ```
//!
//! with `k_j = a_j exp(−b_j / (T_r + 273.15))`. The steady state solves the
//! six component mass balances by damped Newton with an analytic Jacobian,
//! falling back to a damped fixed-point iteration.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::problem::Problem;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;

const CONSTANTS_JSON: &str = include_str!("../../data/williams_otto.json");

pub const MAX_NEWTON_ITERATIONS: usize = 200;
const MAX_FIXED_POINT_ITERATIONS: usize = 20_000;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const TARGET_RESIDUAL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub pre_exponential: f64,
    pub activation_temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitCoefficients {
    pub product_p: f64,
    pub byproduct_e: f64,
    pub feed_a: f64,
    pub feed_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub x_a: f64,
    pub x_g: f64,
}

/// Plant constants, loaded from the versioned `data/williams_otto.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CstrConstants {
    pub version: u32,
    pub description: String,
    pub feed_rate_a: f64,
    pub reactor_mass: f64,
    pub kelvin_offset: f64,
    pub reactions: [Reaction; 3],
    pub profit: ProfitCoefficients,
    pub limits: Limits,
    pub feed_rate_b_range: [f64; 2],
    pub temperature_range: [f64; 2],
}

impl CstrConstants {
    pub fn bundled() -> &'static CstrConstants {
        static CONSTANTS: OnceLock<CstrConstants> = OnceLock::new();
        CONSTANTS.get_or_init(|| {
            serde_json::from_str(CONSTANTS_JSON).expect("bundled reactor constants parse")
        })
    }
}

/// Converged steady state. Fractions are ordered A, B, C, E, G, P.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CstrState {
    pub x_a: f64,
    pub x_b: f64,
    pub x_c: f64,
    pub x_e: f64,
    pub x_g: f64,
    pub x_p: f64,
    pub feed_rate_a: f64,
    pub feed_rate_b: f64,
    pub temperature: f64,
    pub residual: f64,
}

impl CstrState {
    pub fn fractions(&self) -> [f64; 6] {
        [self.x_a, self.x_b, self.x_c, self.x_e, self.x_g, self.x_p]
    }

    pub fn total_fraction(&self) -> f64 {
        self.fractions().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CstrModel {
    constants: CstrConstants,
}

impl Default for CstrModel {
    fn default() -> Self {
        Self::new(CstrConstants::bundled().clone())
    }
}

impl CstrModel {
    pub fn new(constants: CstrConstants) -> Self {
        Self { constants }
    }

    /// Same plant with every rate constant forced to zero.
    pub fn without_reactions() -> Self {
        let mut c = CstrConstants::bundled().clone();
        for r in &mut c.reactions {
            r.pre_exponential = 0.0;
        }
        Self::new(c)
    }

    pub fn constants(&self) -> &CstrConstants {
        &self.constants
    }

    pub fn rate_constants(&self, temperature: f64) -> [f64; 3] {
        let t = temperature + self.constants.kelvin_offset;
        self.constants
            .reactions
            .each_ref()
            .map(|r| r.pre_exponential * (-r.activation_temperature / t).exp())
    }

    /// Mass-balance residuals in kg/s.
    pub fn residual(&self, x: &[f64; 6], feed_rate_b: f64, temperature: f64) -> [f64; 6] {
        let fa = self.constants.feed_rate_a;
        let f = fa + feed_rate_b;
        let w = self.constants.reactor_mass;
        let [k1, k2, k3] = self.rate_constants(temperature);
        let [xa, xb, xc, xe, xg, xp] = *x;
        let r1 = w * k1 * xa * xb;
        let r2 = w * k2 * xb * xc;
        let r3 = w * k3 * xc * xp;
        [
            fa - f * xa - r1,
            feed_rate_b - f * xb - r1 - r2,
            -f * xc + 2.0 * r1 - 2.0 * r2 - r3,
            -f * xe + 2.0 * r2,
            -f * xg + 1.5 * r3,
            -f * xp + r2 - 0.5 * r3,
        ]
    }

    fn jacobian(&self, x: &[f64; 6], feed_rate_b: f64, temperature: f64) -> Vec<f64> {
        let f = self.constants.feed_rate_a + feed_rate_b;
        let w = self.constants.reactor_mass;
        let [k1, k2, k3] = self.rate_constants(temperature);
        let [xa, xb, xc, _, _, xp] = *x;
        let d1 = [w * k1 * xb, w * k1 * xa, 0.0, 0.0, 0.0, 0.0];
        let d2 = [0.0, w * k2 * xc, w * k2 * xb, 0.0, 0.0, 0.0];
        let d3 = [0.0, 0.0, w * k3 * xp, 0.0, 0.0, w * k3 * xc];
        // stoichiometric weights of (r1, r2, r3) in each balance
        let nu: [[f64; 3]; 6] = [
            [-1.0, 0.0, 0.0],
            [-1.0, -1.0, 0.0],
            [2.0, -2.0, -1.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 1.5],
            [0.0, 1.0, -0.5],
        ];
        let mut jac = vec![0.0; 36];
        for row in 0..6 {
            for col in 0..6 {
                jac[row * 6 + col] =
                    nu[row][0] * d1[col] + nu[row][1] * d2[col] + nu[row][2] * d3[col];
            }
            jac[row * 6 + row] -= f;
        }
        jac
    }

    fn feed_state(&self, feed_rate_b: f64) -> [f64; 6] {
        let f = self.constants.feed_rate_a + feed_rate_b;
        [
            self.constants.feed_rate_a / f,
            feed_rate_b / f,
            0.0,
            0.0,
            0.0,
            0.0,
        ]
    }

    fn newton(&self, mut x: [f64; 6], fb: f64, t: f64) -> Option<([f64; 6], f64)> {
        let norm = |r: &[f64; 6]| r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut res = norm(&self.residual(&x, fb, t));
        for _ in 0..MAX_NEWTON_ITERATIONS {
            if res <= TARGET_RESIDUAL {
                break;
            }
            let r = self.residual(&x, fb, t);
            let step = solve_dense(self.jacobian(&x, fb, t), r.map(|v| -v).to_vec()).ok()?;
            let mut alpha = 1.0;
            let mut improved = false;
            while alpha > 1e-10 {
                let mut trial = x;
                for (xi, di) in trial.iter_mut().zip(&step) {
                    *xi += alpha * di;
                }
                let tr = norm(&self.residual(&trial, fb, t));
                if tr < res {
                    x = trial;
                    res = tr;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (res.is_finite() && res <= RESIDUAL_TOLERANCE).then_some((x, res))
    }

    fn fixed_point(&self, fb: f64, t: f64) -> [f64; 6] {
        let fa = self.constants.feed_rate_a;
        let f = fa + fb;
        let w = self.constants.reactor_mass;
        let [k1, k2, k3] = self.rate_constants(t);
        let mut x = self.feed_state(fb);
        for _ in 0..MAX_FIXED_POINT_ITERATIONS {
            let [xa, xb, xc, _, _, xp] = x;
            let next = [
                fa / (f + w * k1 * xb),
                fb / (f + w * k1 * xa + w * k2 * xc),
                2.0 * w * k1 * xa * xb / (f + 2.0 * w * k2 * xb + w * k3 * xp),
                2.0 * w * k2 * xb * xc / f,
                1.5 * w * k3 * xc * xp / f,
                w * k2 * xb * xc / (f + 0.5 * w * k3 * xc),
            ];
            let mut change = 0.0f64;
            for (xi, ni) in x.iter_mut().zip(next) {
                let v = 0.5 * *xi + 0.5 * ni;
                change = change.max((v - *xi).abs());
                *xi = v;
            }
            if change < 1e-15 {
                break;
            }
        }
        x
    }

    /// Steady state for feed rate `F_B` (kg/s) and reactor temperature `T_r` (°C).
    pub fn steady_state(&self, feed_rate_b: f64, temperature: f64) -> Result<CstrState> {
        let [fb_lo, fb_hi] = self.constants.feed_rate_b_range;
        let [t_lo, t_hi] = self.constants.temperature_range;
        if !(fb_lo..=fb_hi).contains(&feed_rate_b) || !(t_lo..=t_hi).contains(&temperature) {
            return Err(Error::OutOfDomain(format!(
                "F_B = {feed_rate_b}, T_r = {temperature} outside [{fb_lo}, {fb_hi}] x [{t_lo}, {t_hi}]"
            )));
        }
        let solved = self
            .newton(self.feed_state(feed_rate_b), feed_rate_b, temperature)
            .or_else(|| {
                let x0 = self.fixed_point(feed_rate_b, temperature);
                self.newton(x0, feed_rate_b, temperature)
            });
        let Some((x, residual)) = solved else {
            let x = self.fixed_point(feed_rate_b, temperature);
            let r = self.residual(&x, feed_rate_b, temperature);
            return Err(Error::NoConvergence {
                iterations: MAX_NEWTON_ITERATIONS,
                residual: r.iter().fold(0.0f64, |a, b| a.max(b.abs())),
            });
        };
        if x.iter().any(|v| *v < -1e-10) {
            return Err(Error::NoConvergence {
                iterations: MAX_NEWTON_ITERATIONS,
                residual,
            });
        }
        Ok(CstrState {
            x_a: x[0],
            x_b: x[1],
            x_c: x[2],
            x_e: x[3],
            x_g: x[4],
            x_p: x[5],
            feed_rate_a: self.constants.feed_rate_a,
            feed_rate_b,
            temperature,
            residual,
        })
    }

    /// Economic profit rate of a steady state.
    pub fn profit(&self, s: &CstrState) -> f64 {
        let p = &self.constants.profit;
        let f = s.feed_rate_a + s.feed_rate_b;
        p.product_p * s.x_p * f + p.byproduct_e * s.x_e * f
            - p.feed_a * s.feed_rate_a
            - p.feed_b * s.feed_rate_b
    }

    /// `(J, g_1, g_2)` with `J = −profit`, `g_1 = X_A − 0.12`, `g_2 = X_G − 0.08`.
    pub fn evaluate(&self, feed_rate_b: f64, temperature: f64) -> Result<(f64, f64, f64)> {
        let s = self.steady_state(feed_rate_b, temperature)?;
        let l = &self.constants.limits;
        Ok((-self.profit(&s), s.x_a - l.x_a, s.x_g - l.x_g))
    }
}

pub fn cstr_steady_state(feed_rate_b: f64, temperature: f64) -> Result<CstrState> {
    CstrModel::default().steady_state(feed_rate_b, temperature)
}

/// `θ = (F_B, T_r)` ↦ `(J, g_1, g_2)`.
pub fn williams_otto_eval(theta: &[f64]) -> Result<(f64, f64, f64)> {
    if theta.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: theta.len(),
        });
    }
    CstrModel::default().evaluate(theta[0], theta[1])
}

#[derive(Debug, Clone)]
pub struct WilliamsOtto {
    model: CstrModel,
    lower: [f64; 2],
    upper: [f64; 2],
}

impl Default for WilliamsOtto {
    fn default() -> Self {
        Self::new(CstrModel::default())
    }
}

impl WilliamsOtto {
    pub fn new(model: CstrModel) -> Self {
        let c = model.constants();
        let lower = [c.feed_rate_b_range[0], c.temperature_range[0]];
        let upper = [c.feed_rate_b_range[1], c.temperature_range[1]];
        Self {
            model,
            lower,
            upper,
        }
    }

    pub fn model(&self) -> &CstrModel {
        &self.model
    }

    pub fn eval(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: theta.len(),
            });
        }
        let (j, g1, g2) = self.model.evaluate(theta[0], theta[1])?;
        Ok(vec![j, g1, g2])
    }
}

impl Problem for WilliamsOtto {
    fn name(&self) -> &str {
        "williams_otto"
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn n_constraints(&self) -> usize {
        2
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<Vec<f64>> {
        self.eval(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_load() {
        let c = CstrConstants::bundled();
        assert_eq!(c.version, 1);
        assert_eq!(c.feed_rate_a, 1.8275);
        assert_eq!(c.reactor_mass, 2105.2);
    }

    #[test]
    fn converges_and_conserves_mass() {
        for &(fb, t) in &[(4.0, 70.0), (7.0, 100.0), (4.39, 80.5), (5.5, 85.0)] {
            let s = cstr_steady_state(fb, t).unwrap();
            assert!(s.residual <= RESIDUAL_TOLERANCE);
            assert!((s.total_fraction() - 1.0).abs() < 1e-8);
            assert!(s.fractions().iter().all(|x| *x >= -1e-10));
        }
    }

    #[test]
    fn no_reaction_limit_is_feed() {
        let m = CstrModel::without_reactions();
        let s = m.steady_state(5.0, 90.0).unwrap();
        let f = 1.8275 + 5.0;
        assert_eq!(s.x_a, 1.8275 / f);
        assert_eq!(s.x_b, 5.0 / f);
        assert_eq!([s.x_c, s.x_e, s.x_g, s.x_p], [0.0; 4]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = CstrModel::default();
        let x = [0.1, 0.4, 0.03, 0.25, 0.07, 0.11];
        let jac = m.jacobian(&x, 5.0, 85.0);
        let h = 1e-7;
        for col in 0..6 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let rp = m.residual(&xp, 5.0, 85.0);
            let rm = m.residual(&xm, 5.0, 85.0);
            for row in 0..6 {
                let fd = (rp[row] - rm[row]) / (2.0 * h);
                assert!((fd - jac[row * 6 + col]).abs() < 1e-5 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn out_of_range_inputs() {
        assert!(matches!(
            cstr_steady_state(3.0, 80.0),
            Err(Error::OutOfDomain(_))
        ));
        assert!(williams_otto_eval(&[5.0, 101.0]).is_err());
        assert!(williams_otto_eval(&[5.0]).is_err());
    }

    #[test]
    fn constraint_offsets() {
        let (_, g1, g2) = williams_otto_eval(&[5.0, 80.0]).unwrap();
        let s = cstr_steady_state(5.0, 80.0).unwrap();
        assert_eq!(g1, s.x_a - 0.12);
        assert_eq!(g2, s.x_g - 0.08);
        assert!(g1 > -0.12);
    }
}
