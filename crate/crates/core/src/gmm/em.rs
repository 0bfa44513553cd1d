//! Maximum-likelihood fitting of 1-D Gaussian mixtures by EM.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{GmmModel, LN_SQRT_2PI};
use crate::error::{Error, Result};
use crate::scalar::{mean_sd, quantile_sorted, sort_scalars, Scalar};

/// Standard deviations never go below this fraction of the data range.
pub const SD_FLOOR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the log-likelihood change per observation drops below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            restarts: 5,
            max_iter: 1000,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// Trace of one EM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmRun<T> {
    /// Log-likelihood of the parameters entering each iteration; the last
    /// entry belongs to the parameters the run returned.
    pub trace: Vec<T>,
    pub converged: bool,
    pub floor_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GmmFit<T> {
    pub model: GmmModel<T>,
    pub runs: Vec<EmRun<T>>,
    pub best_run: usize,
    pub sd_floor: T,
    /// Some component of the returned model sits at the sd floor.
    pub floor_applied: bool,
    /// Components whose weight is below `1 / (10 n)`: more modes than the data supports.
    pub weak_components: Vec<usize>,
}

impl<T: Scalar> GmmFit<T> {
    pub fn converged(&self) -> bool {
        self.runs[self.best_run].converged
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.floor_applied {
            out.push(format!(
                "component collapse: standard deviation held at the floor {}",
                self.sd_floor
            ));
        }
        if !self.weak_components.is_empty() {
            out.push(format!(
                "components {:?} carry weight below 1/(10n); the data may not support {} modes",
                self.weak_components,
                self.model.components()
            ));
        }
        if !self.converged() {
            out.push("EM stopped at max_iter before converging".into());
        }
        out
    }
}

#[derive(Clone)]
struct Params<T> {
    weights: Vec<T>,
    means: Vec<T>,
    sds: Vec<T>,
}

/// Fits an `components`-mode mixture by EM from `config.restarts` starts
/// (quantile start plus jittered variants) and keeps the best likelihood.
pub fn fit_gmm<T: Scalar>(data: &[T], components: usize, config: &EmConfig) -> Result<GmmFit<T>> {
    if components == 0 {
        return Err(Error::InvalidArgument("need at least one component".into()));
    }
    if data.len() < 10 * components {
        return Err(Error::SampleTooSmall {
            needed: 10 * components,
            got: data.len(),
        });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in sample".into()));
    }
    if config.restarts == 0 || config.max_iter == 0 {
        return Err(Error::InvalidArgument("restarts and max_iter must be positive".into()));
    }
    let mut sorted = data.to_vec();
    sort_scalars(&mut sorted);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range <= T::zero() {
        return Err(Error::InvalidArgument("sample has zero range".into()));
    }
    let sd_floor = range * T::lit(SD_FLOOR_FRACTION);
    let (_, sample_sd) = mean_sd(data);

    let starts: Vec<Params<T>> = (0..config.restarts)
        .map(|r| initial_params(&sorted, components, sample_sd, sd_floor, config.seed, r))
        .collect();
    let results: Vec<(Params<T>, EmRun<T>)> = starts
        .into_par_iter()
        .map(|p| run_em(data, p, sd_floor, config))
        .collect();

    let mut best = 0;
    for (i, (_, run)) in results.iter().enumerate() {
        let ll = *run.trace.last().expect("trace is never empty");
        if ll > *results[best].1.trace.last().expect("trace is never empty") {
            best = i;
        }
    }
    let (params, _) = &results[best];
    let log_likelihood = *results[best].1.trace.last().expect("trace is never empty");
    let floor_applied = params.sds.iter().any(|&s| s <= sd_floor);
    let n = data.len();
    let weak_threshold = T::one() / (T::lit(10.0) * T::from_count(n));
    let total: T = params.weights.iter().copied().sum();
    let model = GmmModel::new(
        params.weights.iter().map(|&w| w / total).collect(),
        params.means.clone(),
        params.sds.clone(),
    )?
    .with_fit_info(log_likelihood, n);
    let weak_components = model
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w < weak_threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(GmmFit {
        model,
        runs: results.into_iter().map(|(_, r)| r).collect(),
        best_run: best,
        sd_floor,
        floor_applied,
        weak_components,
    })
}

fn initial_params<T: Scalar>(
    sorted: &[T],
    m: usize,
    sample_sd: T,
    sd_floor: T,
    seed: u64,
    restart: usize,
) -> Params<T> {
    let base_sd = (sample_sd / T::from_count(m)).max(sd_floor);
    let mut means: Vec<T> = (0..m)
        .map(|i| quantile_sorted(sorted, (i as f64 + 0.5) / m as f64))
        .collect();
    let mut sds = vec![base_sd; m];
    let mut weights = vec![T::one() / T::from_count(m); m];
    if restart > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        for i in 0..m {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let c: f64 = StandardNormal.sample(&mut rng);
            means[i] += T::lit(0.5 * a) * base_sd;
            sds[i] = (sds[i] * T::lit((0.25 * b).exp())).max(sd_floor);
            weights[i] = T::lit((0.25 * c).exp());
        }
        let total: T = weights.iter().copied().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Params { weights, means, sds }
}

fn run_em<T: Scalar>(
    data: &[T],
    mut p: Params<T>,
    sd_floor: T,
    config: &EmConfig,
) -> (Params<T>, EmRun<T>) {
    let n = data.len();
    let m = p.weights.len();
    let mut stats = Stats::new(m);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut floor_applied = false;
    let tol = T::lit(config.tol);
    let n_t = T::from_count(n);

    for iter in 0..config.max_iter {
        let ll = e_step(data, &p, &mut stats);
        if let Some(&prev) = trace.last() {
            let delta: T = ll - prev;
            trace.push(ll);
            if (delta / n_t).abs() < tol {
                converged = true;
                break;
            }
        } else {
            trace.push(ll);
        }
        if iter + 1 == config.max_iter {
            break;
        }
        floor_applied |= m_step(n, &mut p, &stats, sd_floor);
    }
    (
        p,
        EmRun {
            trace,
            converged,
            floor_applied,
        },
    )
}

/// Responsibility-weighted sums from one E step. Squares are taken about
/// the current means and shifted to the new ones in the M step.
struct Stats<T> {
    nk: Vec<T>,
    sx: Vec<T>,
    sxx: Vec<T>,
    r: Vec<T>,
}

impl<T: Scalar> Stats<T> {
    fn new(m: usize) -> Self {
        Stats {
            nk: vec![T::zero(); m],
            sx: vec![T::zero(); m],
            sxx: vec![T::zero(); m],
            r: vec![T::zero(); m],
        }
    }
}

/// Accumulates responsibility-weighted sums and returns the log-likelihood.
fn e_step<T: Scalar>(data: &[T], p: &Params<T>, st: &mut Stats<T>) -> T {
    let m = p.weights.len();
    let consts: Vec<T> = (0..m)
        .map(|i| p.weights[i].ln() - p.sds[i].ln() - T::lit(LN_SQRT_2PI))
        .collect();
    let inv_var: Vec<T> = p.sds.iter().map(|&s| T::lit(0.5) / (s * s)).collect();
    for v in [&mut st.nk, &mut st.sx, &mut st.sxx] {
        v.iter_mut().for_each(|x| *x = T::zero());
    }
    let r = &mut st.r;
    let mut ll = T::zero();
    for &x in data {
        let mut max = T::neg_infinity();
        let mut arg = 0;
        for i in 0..m {
            let d = x - p.means[i];
            let l = consts[i] - d * d * inv_var[i];
            r[i] = l;
            if l > max {
                max = l;
                arg = i;
            }
        }
        let mut sum = T::zero();
        for (i, v) in r.iter_mut().enumerate() {
            *v = if i == arg { T::one() } else { (*v - max).exp() };
            sum += *v;
        }
        ll += max + sum.ln();
        for i in 0..m {
            let w = r[i] / sum;
            let d = x - p.means[i];
            st.nk[i] += w;
            st.sx[i] += w * d;
            st.sxx[i] += w * d * d;
        }
    }
    ll
}

/// Returns whether any sd was clamped to the floor.
fn m_step<T: Scalar>(n: usize, p: &mut Params<T>, st: &Stats<T>, sd_floor: T) -> bool {
    let m = p.weights.len();
    let n = T::from_count(n);
    let mut clamped = false;
    for i in 0..m {
        let nk = st.nk[i];
        p.weights[i] = nk / n;
        if nk > T::zero() {
            let shift = st.sx[i] / nk;
            p.means[i] += shift;
            let var = (st.sxx[i] / nk - shift * shift).max(T::zero());
            let sd = var.sqrt();
            if !(sd > sd_floor) {
                clamped = true;
                p.sds[i] = sd_floor;
            } else {
                p.sds[i] = sd;
            }
        }
    }
    clamped
}

/// Candidate mode counts ranked by BIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCandidate {
    pub components: usize,
    pub log_likelihood: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSelection {
    pub candidates: Vec<ModeCandidate>,
    /// `argmin` BIC. A suggestion only; nothing applies it automatically.
    pub suggested: usize,
}

/// Fits `M = 1..=max_components` and scores each by
/// `BIC = -2 ln L + (3M - 1) ln n`.
pub fn select_modes<T: Scalar>(
    data: &[T],
    max_components: usize,
    config: &EmConfig,
) -> Result<ModeSelection> {
    if max_components == 0 {
        return Err(Error::InvalidArgument("max_components must be at least 1".into()));
    }
    let ln_n = (data.len() as f64).ln();
    let mut candidates = Vec::with_capacity(max_components);
    for m in 1..=max_components {
        let fit = fit_gmm(data, m, config)?;
        let ll = fit
            .model
            .log_likelihood()
            .expect("fitted models carry a likelihood")
            .as_f64();
        candidates.push(ModeCandidate {
            components: m,
            log_likelihood: ll,
            bic: -2.0 * ll + (3 * m - 1) as f64 * ln_n,
        });
    }
    let suggested = candidates
        .iter()
        .min_by(|a, b| a.bic.total_cmp(&b.bic))
        .map(|c| c.components)
        .unwrap_or(1);
    Ok(ModeSelection {
        candidates,
        suggested,
    })
}
