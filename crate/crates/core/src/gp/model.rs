use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::ParameterVector;
use super::kernel::Kernel;
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::scalar::Scalar;

/// Queries per work unit in the batched posterior.
const BATCH_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation<T> {
    pub point: ParameterVector<T>,
    pub value: T,
    /// 0 for the objective, `i ≥ 1` for constraint `i`.
    pub output_index: usize,
}

impl<T> Observation<T> {
    pub fn new(point: ParameterVector<T>, value: T, output_index: usize) -> Self {
        Self {
            point,
            value,
            output_index,
        }
    }
}

/// Zero-mean GP regression model for a single output.
///
/// The factor of `K + λI` is rebuilt after every accepted observation; all
/// queries are read-only.
#[derive(Debug, Clone)]
pub struct GpModel<T> {
    kernel: Kernel<T>,
    noise_variance: T,
    output_index: usize,
    points: Vec<ParameterVector<T>>,
    values: Vec<T>,
    factor: Option<Cholesky<T>>,
    /// `(K + λI)⁻¹ y`
    alpha: Vec<T>,
}

impl<T: Scalar> GpModel<T> {
    pub fn new(kernel: Kernel<T>, noise_variance: T, output_index: usize) -> Result<Self> {
        if !(noise_variance > T::zero()) || !noise_variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        Ok(Self {
            kernel,
            noise_variance,
            output_index,
            points: Vec::new(),
            values: Vec::new(),
            factor: None,
            alpha: Vec::new(),
        })
    }

    /// Builds a model and conditions it on `observations` in order.
    pub fn with_observations(
        kernel: Kernel<T>,
        noise_variance: T,
        output_index: usize,
        observations: impl IntoIterator<Item = Observation<T>>,
    ) -> Result<Self> {
        let mut m = Self::new(kernel, noise_variance, output_index)?;
        for o in observations {
            m.check_observation(&o)?;
            m.points.push(o.point);
            m.values.push(o.value);
        }
        m.refactor()?;
        Ok(m)
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn output_index(&self) -> usize {
        self.output_index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ParameterVector<T>] {
        &self.points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn factor(&self) -> Option<&Cholesky<T>> {
        self.factor.as_ref()
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation<T>> + '_ {
        self.points
            .iter()
            .zip(&self.values)
            .map(move |(p, v)| Observation::new(p.clone(), *v, self.output_index))
    }

    fn check_observation(&self, obs: &Observation<T>) -> Result<()> {
        if obs.output_index != self.output_index {
            return Err(Error::InvalidArgument(format!(
                "observation for output {} given to model of output {}",
                obs.output_index, self.output_index
            )));
        }
        if obs.point.dim() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: obs.point.dim(),
            });
        }
        if !obs.value.is_finite() || obs.point.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite observation".into()));
        }
        Ok(())
    }

    /// Conditions the model on one more observation. On factorization failure
    /// the model is left unchanged.
    pub fn add_observation(&mut self, obs: Observation<T>) -> Result<()> {
        self.check_observation(&obs)?;
        self.points.push(obs.point);
        self.values.push(obs.value);
        if let Err(e) = self.refactor() {
            self.points.pop();
            self.values.pop();
            self.refactor()?;
            return Err(e);
        }
        Ok(())
    }

    /// Returns a new model with `obs` added.
    pub fn with_observation(&self, obs: Observation<T>) -> Result<Self> {
        let mut m = self.clone();
        m.add_observation(obs)?;
        Ok(m)
    }

    /// Replaces kernel and noise, refactorizing the existing data.
    pub fn set_hyperparameters(&mut self, kernel: Kernel<T>, noise_variance: T) -> Result<()> {
        if kernel.dim() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: kernel.dim(),
            });
        }
        let old = std::mem::replace(&mut self.kernel, kernel);
        let old_noise = std::mem::replace(&mut self.noise_variance, noise_variance);
        if let Err(e) = self.refactor() {
            self.kernel = old;
            self.noise_variance = old_noise;
            self.refactor()?;
            return Err(e);
        }
        Ok(())
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.points.len();
        if n == 0 {
            self.factor = None;
            self.alpha.clear();
            return Ok(());
        }
        let mut k = self.kernel.gram(&self.points);
        for i in 0..n {
            k[i * n + i] = k[i * n + i] + self.noise_variance;
        }
        let chol = Cholesky::factor(&k, n)?;
        self.alpha = chol.solve(&self.values);
        self.factor = Some(chol);
        Ok(())
    }

    fn clamp_variance(&self, var: T, prior: T) -> Result<T> {
        if var >= T::zero() {
            return Ok(var);
        }
        let tol = T::lit(1e-9).max(T::lit(64.0) * T::epsilon() * prior);
        if var >= -tol {
            Ok(T::zero())
        } else {
            Err(Error::NegativeVariance(var.as_f64()))
        }
    }

    /// Posterior mean and variance at `query`.
    pub fn posterior(&self, query: &[T]) -> Result<(T, T)> {
        if query.len() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: query.len(),
            });
        }
        let prior = self.kernel.eval_unchecked(query, query);
        let Some(chol) = &self.factor else {
            return Ok((T::zero(), prior));
        };
        let mut kq: Vec<T> = self
            .points
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, query))
            .collect();
        let mut mean = T::zero();
        for (k, a) in kq.iter().zip(&self.alpha) {
            mean = mean + *k * *a;
        }
        chol.solve_lower_in_place(&mut kq);
        let mut reduction = T::zero();
        for v in &kq {
            reduction = reduction + *v * *v;
        }
        Ok((mean, self.clamp_variance(prior - reduction, prior)?))
    }

    /// Posterior standard deviation.
    pub fn std_dev(&self, query: &[T]) -> Result<T> {
        Ok(self.posterior(query)?.1.sqrt())
    }

    /// `μ − β^{1/2} σ`
    pub fn lcb(&self, query: &[T], beta_sqrt: T) -> Result<T> {
        check_beta(beta_sqrt)?;
        let (m, v) = self.posterior(query)?;
        Ok(m - beta_sqrt * v.sqrt())
    }

    /// `μ + β^{1/2} σ`
    pub fn ucb(&self, query: &[T], beta_sqrt: T) -> Result<T> {
        check_beta(beta_sqrt)?;
        let (m, v) = self.posterior(query)?;
        Ok(m + beta_sqrt * v.sqrt())
    }

    /// Posterior mean and variance at many points.
    ///
    /// Cross-covariance columns are forward-substituted as a block, chunked
    /// across worker threads. Each column sees exactly the operation sequence
    /// of [`posterior`](Self::posterior), so results are bit-identical to it.
    pub fn posterior_batch(&self, queries: &[ParameterVector<T>]) -> Result<Vec<(T, T)>> {
        let d = self.kernel.dim();
        if let Some(q) = queries.iter().find(|q| q.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: q.dim(),
            });
        }
        let chunks: Vec<Result<Vec<(T, T)>>> = queries
            .par_chunks(BATCH_CHUNK)
            .map(|chunk| self.posterior_block(chunk))
            .collect();
        let mut out = Vec::with_capacity(queries.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }

    fn posterior_block(&self, queries: &[ParameterVector<T>]) -> Result<Vec<(T, T)>> {
        let m = queries.len();
        let priors: Vec<T> = queries
            .iter()
            .map(|q| self.kernel.eval_unchecked(q, q))
            .collect();
        let Some(chol) = &self.factor else {
            return Ok(priors.into_iter().map(|p| (T::zero(), p)).collect());
        };
        let t = self.points.len();
        // v[i * m + j] = k(x_i, q_j)
        let mut v = vec![T::zero(); t * m];
        for (i, p) in self.points.iter().enumerate() {
            for (j, q) in queries.iter().enumerate() {
                v[i * m + j] = self.kernel.eval_unchecked(p, q);
            }
        }
        let mut means = vec![T::zero(); m];
        for i in 0..t {
            let a = self.alpha[i];
            for j in 0..m {
                means[j] = means[j] + v[i * m + j] * a;
            }
        }
        for i in 0..t {
            let (done, rest) = v.split_at_mut(i * m);
            let row = &mut rest[..m];
            for k in 0..i {
                let l = chol.get(i, k);
                let prev = &done[k * m..(k + 1) * m];
                for j in 0..m {
                    row[j] = row[j] - l * prev[j];
                }
            }
            let diag = chol.get(i, i);
            for x in row.iter_mut() {
                *x = *x / diag;
            }
        }
        let mut reductions = vec![T::zero(); m];
        for i in 0..t {
            for j in 0..m {
                let x = v[i * m + j];
                reductions[j] = reductions[j] + x * x;
            }
        }
        (0..m)
            .map(|j| {
                let var = self.clamp_variance(priors[j] - reductions[j], priors[j])?;
                Ok((means[j], var))
            })
            .collect()
    }

    /// Exact log marginal likelihood `log p(y | X)`.
    pub fn log_marginal_likelihood(&self) -> T {
        let Some(chol) = &self.factor else {
            return T::zero();
        };
        let n = T::lit(self.points.len() as f64);
        let fit: T = self
            .values
            .iter()
            .zip(&self.alpha)
            .map(|(y, a)| *y * *a)
            .sum();
        let half = T::lit(0.5);
        -half * fit - half * chol.log_det() - half * n * T::lit((2.0 * std::f64::consts::PI).ln())
    }
}

fn check_beta<T: Scalar>(beta_sqrt: T) -> Result<()> {
    if beta_sqrt >= T::zero() && beta_sqrt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "beta_sqrt must be a finite non-negative number, got {beta_sqrt}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn se1() -> Kernel<f64> {
        Kernel::squared_exponential(vec![1.0], 1.0).unwrap()
    }

    fn pv(x: &[f64]) -> ParameterVector<f64> {
        ParameterVector(x.to_vec())
    }

    #[test]
    fn empty_model_is_prior() {
        let m = GpModel::new(se1(), 0.01, 0).unwrap();
        assert_eq!(m.posterior(&[3.0]).unwrap(), (0.0, 1.0));
        assert_eq!(m.lcb(&[3.0], 2.0).unwrap(), -2.0);
        assert_eq!(m.ucb(&[3.0], 2.0).unwrap(), 2.0);
        assert_eq!(m.lcb(&[3.0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_observation_closed_form() {
        let mut m = GpModel::new(se1(), 0.01, 0).unwrap();
        m.add_observation(Observation::new(pv(&[0.0]), 1.0, 0))
            .unwrap();
        let (mean, var) = m.posterior(&[0.0]).unwrap();
        assert_relative_eq!(mean, 1.0 / 1.01, epsilon = 1e-14);
        assert_relative_eq!(var, 1.0 - 1.0 / 1.01, epsilon = 1e-14);
        assert_relative_eq!(mean, 0.990099, epsilon = 1e-6);
        assert_relative_eq!(var, 0.009901, epsilon = 1e-6);
        // rank-1 formula k·λ/(k+λ)
        assert_relative_eq!(var, 0.01 / 1.01, epsilon = 1e-14);
        let lcb = m.lcb(&[0.0], 1.0).unwrap();
        assert_relative_eq!(lcb, 1.0 / 1.01 - (0.01f64 / 1.01).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(lcb, 0.890596, epsilon = 1e-6);
    }

    #[test]
    fn near_noiseless_interpolation() {
        let xs = [[0.0, 0.0], [1.0, 0.5], [-0.7, 2.0], [2.5, -1.0]];
        let ys = [0.3, -1.2, 2.0, 0.7];
        let k = Kernel::matern52(vec![1.0, 1.5], 1.0).unwrap();
        let m = GpModel::with_observations(
            k,
            1e-8,
            0,
            xs.iter()
                .zip(ys)
                .map(|(x, y)| Observation::new(pv(x), y, 0)),
        )
        .unwrap();
        for (x, y) in xs.iter().zip(ys) {
            assert!((m.posterior(x).unwrap().0 - y).abs() < 1e-3);
        }
    }

    #[test]
    fn repeated_point_shrinks_toward_value() {
        let mut m = GpModel::new(se1(), 0.01, 0).unwrap();
        m.add_observation(Observation::new(pv(&[0.5]), 2.0, 0))
            .unwrap();
        let before = m.posterior(&[0.5]).unwrap().0;
        m.add_observation(Observation::new(pv(&[0.5]), 2.0, 0))
            .unwrap();
        let after = m.posterior(&[0.5]).unwrap().0;
        assert!((after - 2.0).abs() < (before - 2.0).abs());
    }

    #[test]
    fn five_points_near_interpolate() {
        let xs = [-4.0, -2.0, 0.0, 2.0, 4.0];
        let mut m = GpModel::new(se1(), 0.01, 0).unwrap();
        for (i, x) in xs.iter().enumerate() {
            m.add_observation(Observation::new(pv(&[*x]), i as f64 - 2.0, 0))
                .unwrap();
        }
        assert_eq!(m.len(), 5);
        for x in xs {
            assert!(m.posterior(&[x]).unwrap().1 <= 0.01 * 1.01);
        }
    }

    #[test]
    fn wrong_output_index_rejected() {
        let mut m = GpModel::new(se1(), 0.01, 1).unwrap();
        assert!(m
            .add_observation(Observation::new(pv(&[0.0]), 1.0, 0))
            .is_err());
        assert!(m
            .add_observation(Observation::new(pv(&[0.0, 1.0]), 1.0, 1))
            .is_err());
        assert!(m
            .add_observation(Observation::new(pv(&[0.0]), f64::NAN, 1))
            .is_err());
        assert!(m.is_empty());
        assert!(m.lcb(&[0.0], -1.0).is_err());
        assert!(GpModel::new(se1(), 0.0, 0).is_err());
    }

    #[test]
    fn batch_matches_scalar_bitwise() {
        let k = Kernel::squared_exponential(vec![0.8, 1.3], 1.7).unwrap();
        let mut m = GpModel::new(k, 1e-4, 0).unwrap();
        for i in 0..10 {
            let x = (i as f64 * 0.731).sin() * 3.0;
            let y = (i as f64 * 1.37).cos() * 2.0;
            m.add_observation(Observation::new(pv(&[x, y]), x * y, 0))
                .unwrap();
        }
        let qs: Vec<_> = (0..700)
            .map(|j| pv(&[(j as f64 * 0.01) - 3.0, (j as f64 * 0.37).sin()]))
            .collect();
        let batch = m.posterior_batch(&qs).unwrap();
        for (q, b) in qs.iter().zip(&batch) {
            assert_eq!(m.posterior(q).unwrap(), *b);
        }
    }

    #[test]
    fn log_marginal_likelihood_single_point() {
        let mut m = GpModel::new(se1(), 0.5, 0).unwrap();
        m.add_observation(Observation::new(pv(&[0.0]), 2.0, 0))
            .unwrap();
        // y ~ N(0, 1.5)
        let expected =
            -0.5 * 4.0 / 1.5 - 0.5 * 1.5f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(m.log_marginal_likelihood(), expected, epsilon = 1e-13);
    }
}
