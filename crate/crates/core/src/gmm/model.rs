use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on `sum(weights) == 1` for externally supplied parameters.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// One-dimensional Gaussian mixture `sum_i w_i N(x | m_i, s_i)` with
/// components kept in ascending order of their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GmmParams<T>", into = "GmmParams<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GmmModel<T> {
    weights: Vec<T>,
    means: Vec<T>,
    sds: Vec<T>,
    log_likelihood: Option<T>,
    fitted_on: usize,
}

/// Wire form of a [`GmmModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmParams<T> {
    pub weights: Vec<T>,
    pub means: Vec<T>,
    pub sds: Vec<T>,
    #[serde(default)]
    pub loglik: Option<T>,
    #[serde(default)]
    pub n: usize,
}

impl<T: Scalar> TryFrom<GmmParams<T>> for GmmModel<T> {
    type Error = Error;

    fn try_from(p: GmmParams<T>) -> Result<Self> {
        let mut m = GmmModel::new(p.weights, p.means, p.sds)?;
        m.log_likelihood = p.loglik;
        m.fitted_on = p.n;
        Ok(m)
    }
}

impl<T: Scalar> From<GmmModel<T>> for GmmParams<T> {
    fn from(m: GmmModel<T>) -> Self {
        GmmParams {
            weights: m.weights,
            means: m.means,
            sds: m.sds,
            loglik: m.log_likelihood,
            n: m.fitted_on,
        }
    }
}

impl<T: Scalar> GmmModel<T> {
    /// Validates and normalises parameters: weights must be nonnegative and
    /// sum to one within [`WEIGHT_SUM_TOLERANCE`] (they are then rescaled to
    /// sum exactly), sds must be positive. Components are sorted by mean.
    pub fn new(weights: Vec<T>, means: Vec<T>, sds: Vec<T>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::InvalidModel("at least one component is required".into()));
        }
        if means.len() != m || sds.len() != m {
            return Err(Error::InvalidModel(format!(
                "{} weights, {} means, {} sds",
                m,
                means.len(),
                sds.len()
            )));
        }
        if weights.iter().chain(&means).chain(&sds).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::InvalidModel("negative weight".into()));
        }
        if sds.iter().any(|s| *s <= T::zero()) {
            return Err(Error::InvalidModel("standard deviations must be positive".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total.as_f64() - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| means[a].total_cmp_s(&means[b]).then(a.cmp(&b)));
        Ok(GmmModel {
            weights: order.iter().map(|&i| weights[i] / total).collect(),
            means: order.iter().map(|&i| means[i]).collect(),
            sds: order.iter().map(|&i| sds[i]).collect(),
            log_likelihood: None,
            fitted_on: 0,
        })
    }

    pub(crate) fn with_fit_info(mut self, log_likelihood: T, fitted_on: usize) -> Self {
        self.log_likelihood = Some(log_likelihood);
        self.fitted_on = fitted_on;
        self
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn sds(&self) -> &[T] {
        &self.sds
    }

    pub fn log_likelihood(&self) -> Option<T> {
        self.log_likelihood
    }

    pub fn fitted_on(&self) -> usize {
        self.fitted_on
    }

    /// `ln(w_i N(x | m_i, s_i))`.
    #[inline]
    pub fn component_log_density(&self, i: usize, x: T) -> T {
        let z = (x - self.means[i]) / self.sds[i];
        self.weights[i].ln() - self.sds[i].ln() - T::lit(0.5) * z * z - T::lit(LN_SQRT_2PI)
    }

    /// Mixture density.
    pub fn pdf(&self, x: T) -> T {
        (0..self.components())
            .map(|i| self.component_log_density(i, x).exp())
            .sum()
    }

    /// `ln pdf(x)` via log-sum-exp; finite wherever some component has nonzero weight.
    pub fn log_pdf(&self, x: T) -> T {
        log_sum_exp((0..self.components()).map(|i| self.component_log_density(i, x)))
    }

    pub fn cdf(&self, x: T) -> T {
        let x = x.as_f64();
        let p: f64 = (0..self.components())
            .map(|i| {
                self.weights[i].as_f64()
                    * normal_cdf((x - self.means[i].as_f64()) / self.sds[i].as_f64())
            })
            .sum();
        T::lit(p.clamp(0.0, 1.0))
    }

    /// Posterior class probabilities `p(c_i | x)`, computed in log space so
    /// that far tails never produce NaN.
    pub fn posterior(&self, x: T) -> Vec<T> {
        let logs: Vec<T> = (0..self.components())
            .map(|i| self.component_log_density(i, x))
            .collect();
        let norm = log_sum_exp(logs.iter().copied());
        logs.into_iter().map(|l| (l - norm).exp()).collect()
    }

    /// Mixture quantile by bisection on the CDF to `1e-9` (relative to the
    /// bracket scale).
    pub fn quantile(&self, p: f64) -> T {
        let p = p.clamp(0.0, 1.0);
        let mut lo = (0..self.components())
            .map(|i| self.means[i].as_f64() - 40.0 * self.sds[i].as_f64())
            .fold(f64::INFINITY, f64::min);
        let mut hi = (0..self.components())
            .map(|i| self.means[i].as_f64() + 40.0 * self.sds[i].as_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-9 * (hi - lo).abs().max(1e-300);
        // always bisect in f64, even for f32 models
        let cdf64 = |x: f64| -> f64 {
            (0..self.components())
                .map(|i| {
                    self.weights[i].as_f64()
                        * normal_cdf((x - self.means[i].as_f64()) / self.sds[i].as_f64())
                })
                .sum()
        };
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if cdf64(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        T::lit(0.5 * (lo + hi))
    }

    /// Number of free parameters, `3M - 1`.
    pub fn free_parameters(&self) -> usize {
        3 * self.components() - 1
    }
}

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn log_sum_exp<T: Scalar>(terms: impl Iterator<Item = T> + Clone) -> T {
    let max = terms.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<T>().ln()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// `w N(x | m, s)` density of a single normal.
pub fn normal_pdf<T: Scalar>(x: T, mean: T, sd: T) -> T {
    let z = (x - mean) / sd;
    (-(T::lit(0.5) * z * z)).exp() / (sd * T::lit(LN_SQRT_2PI).exp())
}
