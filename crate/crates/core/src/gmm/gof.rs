use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::model::GmmModel;
use crate::error::{Error, Result};
use crate::scalar::{quantile_sorted, sort_scalars, Scalar};

const MIN_EXPECTED: f64 = 5.0;
const BINS_PER_COMPONENT: usize = 10;

/// Chi-square goodness of fit of a mixture against a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub chi2_statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bin count after merging.
    pub bins: usize,
    pub bin_edges: Vec<f64>,
    pub observed: Vec<usize>,
    pub expected: Vec<f64>,
}

/// Equal-width bins over `[min, max]` (`10 M` of them), merged left to
/// right until every expected count is at least 5. The outer bins absorb
/// the model's tail mass. `dof = bins - 3M`, floored at 1.
pub fn chi_square_gof<T: Scalar>(model: &GmmModel<T>, data: &[T]) -> Result<GofResult> {
    if data.len() < 50 {
        return Err(Error::SampleTooSmall {
            needed: 50,
            got: data.len(),
        });
    }
    let mut sorted: Vec<f64> = data.iter().map(|v| v.as_f64()).collect();
    sort_scalars(&mut sorted);
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let raw_bins = BINS_PER_COMPONENT * model.components();
    let width = (hi - lo) / raw_bins as f64;
    let edges: Vec<f64> = (0..=raw_bins)
        .map(|k| if k == raw_bins { hi } else { lo + width * k as f64 })
        .collect();

    let mut observed = vec![0usize; raw_bins];
    if width > 0.0 {
        for &x in &sorted {
            let k = (((x - lo) / width) as usize).min(raw_bins - 1);
            observed[k] += 1;
        }
    } else {
        observed[0] = n;
    }
    let cdf = |x: f64| model.cdf(T::lit(x)).as_f64();
    let expected: Vec<f64> = (0..raw_bins)
        .map(|k| {
            let a = if k == 0 { 0.0 } else { cdf(edges[k]) };
            let b = if k + 1 == raw_bins { 1.0 } else { cdf(edges[k + 1]) };
            n as f64 * (b - a).max(0.0)
        })
        .collect();

    // merge
    let mut m_edges = vec![edges[0]];
    let mut m_obs = Vec::new();
    let mut m_exp: Vec<f64> = Vec::new();
    let (mut acc_o, mut acc_e) = (0usize, 0.0f64);
    for k in 0..raw_bins {
        acc_o += observed[k];
        acc_e += expected[k];
        if acc_e >= MIN_EXPECTED {
            m_obs.push(acc_o);
            m_exp.push(acc_e);
            m_edges.push(edges[k + 1]);
            acc_o = 0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0 {
        match (m_obs.last_mut(), m_exp.last_mut()) {
            (Some(o), Some(e)) => {
                *o += acc_o;
                *e += acc_e;
                *m_edges.last_mut().expect("edges start non-empty") = hi;
            }
            _ => {
                m_obs.push(acc_o);
                m_exp.push(acc_e);
                m_edges.push(hi);
            }
        }
    }
    let bins = m_obs.len();
    if bins < 2 {
        return Err(Error::TooFewBins(bins));
    }
    let statistic: f64 = m_obs
        .iter()
        .zip(&m_exp)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            if e > 0.0 {
                d * d / e
            } else if o > 0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = bins.saturating_sub(3 * model.components()).max(1);
    let p_value = if statistic.is_finite() {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sf(statistic)
            .clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(GofResult {
        chi2_statistic: statistic,
        dof,
        p_value,
        bins,
        bin_edges: m_edges,
        observed: m_obs,
        expected: m_exp,
    })
}

/// Paired empirical and model quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData<T> {
    pub probabilities: Vec<f64>,
    pub empirical: Vec<T>,
    pub model: Vec<T>,
    pub max_abs_deviation: T,
    /// `max(sample) - min(sample)`, for judging the deviation.
    pub data_range: T,
}

impl<T: Scalar> QqData<T> {
    /// Maximum deviation as a fraction of the data range.
    pub fn relative_deviation(&self) -> f64 {
        if self.data_range > T::zero() {
            (self.max_abs_deviation / self.data_range).as_f64()
        } else {
            0.0
        }
    }
}

/// Quantiles at `(i - 0.5) / points`: Hazen empirical quantiles against the
/// mixture quantiles obtained by CDF bisection.
pub fn qq_data<T: Scalar>(model: &GmmModel<T>, data: &[T], points: usize) -> Result<QqData<T>> {
    if points < 10 {
        return Err(Error::InvalidArgument("qq_data needs at least 10 points".into()));
    }
    if data.is_empty() {
        return Err(Error::Empty("qq_data on an empty sample".into()));
    }
    let mut sorted = data.to_vec();
    sort_scalars(&mut sorted);
    let probabilities: Vec<f64> = (1..=points).map(|i| (i as f64 - 0.5) / points as f64).collect();
    let empirical: Vec<T> = probabilities.iter().map(|&p| quantile_sorted(&sorted, p)).collect();
    let model_q: Vec<T> = probabilities.iter().map(|&p| model.quantile(p)).collect();
    let max_abs_deviation = empirical
        .iter()
        .zip(&model_q)
        .map(|(&a, &b)| (a - b).abs())
        .fold(T::zero(), T::max);
    Ok(QqData {
        probabilities,
        empirical,
        model: model_q,
        max_abs_deviation,
        data_range: sorted[sorted.len() - 1] - sorted[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_sample(n: usize, mean: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + z
            })
            .collect::<Vec<f64>>()
    }

    #[test]
    fn shifted_model_is_rejected() {
        let data = normal_sample(500, 0.0, 1);
        let model = GmmModel::new(vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let r = chi_square_gof(&model, &data).unwrap();
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn all_mass_outside_the_data_leaves_one_bin() {
        let data = normal_sample(500, 0.0, 1);
        let model = GmmModel::new(vec![1.0], vec![50.0], vec![1.0]).unwrap();
        assert!(matches!(chi_square_gof(&model, &data), Err(Error::TooFewBins(1))));
    }

    #[test]
    fn correct_model_is_accepted_and_bins_are_merged() {
        let data = normal_sample(2000, 0.0, 2);
        let model = GmmModel::new(vec![1.0], vec![0.0], vec![1.0]).unwrap();
        let r = chi_square_gof(&model, &data).unwrap();
        assert!(r.p_value > 0.01, "p {}", r.p_value);
        assert!(r.expected.iter().all(|&e| e >= 5.0));
        assert_eq!(r.observed.iter().sum::<usize>(), 2000);
        assert!((r.expected.iter().sum::<f64>() - 2000.0).abs() < 1e-6);
        assert_eq!(r.dof, r.bins - 3);
        assert_eq!(r.bin_edges.len(), r.bins + 1);
    }

    #[test]
    fn small_sample_rejected() {
        let model = GmmModel::new(vec![1.0], vec![0.0], vec![1.0]).unwrap();
        assert!(chi_square_gof(&model, &[0.0; 10]).is_err());
    }

    #[test]
    fn qq_of_own_quantile_grid_is_diagonal() {
        let model = GmmModel::new(vec![1.0], vec![2.0], vec![0.5]).unwrap();
        let points = 200;
        let data: Vec<f64> = (1..=points)
            .map(|i| model.quantile((i as f64 - 0.5) / points as f64))
            .collect();
        let qq = qq_data(&model, &data, points).unwrap();
        assert!(qq.max_abs_deviation < 1e-6);
        assert!(qq.empirical.windows(2).all(|w| w[0] <= w[1]));
        assert!(qq.model.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn qq_needs_ten_points() {
        let model = GmmModel::new(vec![1.0], vec![2.0], vec![0.5]).unwrap();
        assert!(qq_data(&model, &[1.0, 2.0], 5).is_err());
    }
}
