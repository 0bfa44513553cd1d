use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sort_scalars, Scalar};

pub const DEFAULT_GRID_SIZE: usize = 512;
/// Pairwise differences are taken over at most this many points.
pub const RADIUS_SUBSAMPLE: usize = 1000;
pub const RADIUS_PERCENTILE: f64 = 0.18;
pub const RADIUS_RULE: &str = "p18-pairwise-abs-diff";
const MIN_SAMPLE: usize = 10;

/// Uniform-kernel density on an evenly spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate<T> {
    pub kernel_points: Vec<T>,
    pub densities: Vec<T>,
    pub pareto_radius: T,
    /// Constant sample: the estimate is a narrow triangular spike.
    pub degenerate: bool,
    /// How the radius was chosen; the rule is an approximation of the
    /// original PDE radius, so it is recorded with every estimate.
    pub radius_rule: String,
    pub sample_size: usize,
}

impl<T: Scalar> DensityEstimate<T> {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.kernel_points, &self.densities)
    }

    /// Kernel point with the highest density (first one on ties).
    pub fn mode(&self) -> T {
        let mut best = 0;
        for (i, d) in self.densities.iter().enumerate() {
            if *d > self.densities[best] {
                best = i;
            }
        }
        self.kernel_points[best]
    }

    /// Local maxima whose prominence exceeds `fraction` of the global
    /// maximum. The uniform kernel makes the estimate a step function, so
    /// plain height would also count the ripples on top of each mode.
    /// Plateaus count once, at their centre.
    pub fn local_maxima(&self, fraction: f64) -> Vec<T> {
        let d: Vec<f64> = self.densities.iter().map(|v| v.as_f64()).collect();
        let top = d.iter().cloned().fold(0.0, f64::max);
        let mut peaks = Vec::new();
        let mut i = 0;
        while i < d.len() {
            let mut j = i;
            while j + 1 < d.len() && d[j + 1] == d[i] {
                j += 1;
            }
            let left_lower = i == 0 || d[i - 1] < d[i];
            let right_lower = j + 1 == d.len() || d[j + 1] < d[i];
            if left_lower && right_lower {
                peaks.push((i, j));
            }
            i = j + 1;
        }
        peaks
            .into_iter()
            .filter(|&(i, j)| prominence(&d, i, j) > fraction * top)
            .map(|(i, j)| self.kernel_points[(i + j) / 2])
            .collect()
    }
}

/// Height of the plateau `d[i..=j]` above the higher of the two lowest
/// points reached on either side before meeting something taller (or the
/// edge of the grid).
fn prominence(d: &[f64], i: usize, j: usize) -> f64 {
    let h = d[i];
    let left_min = d[..i]
        .iter()
        .rev()
        .take_while(|v| **v <= h)
        .fold(h, |m, v| m.min(*v));
    let right_min = d[j + 1..]
        .iter()
        .take_while(|v| **v <= h)
        .fold(h, |m, v| m.min(*v));
    h - left_min.max(right_min)
}

pub(crate) fn trapezoid<T: Scalar>(x: &[T], y: &[T]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]).as_f64() * (ys[0] + ys[1]).as_f64())
        .sum()
}

/// Pareto radius of a sorted sample: the 18th percentile of the pairwise
/// absolute differences, on an evenly strided subsample for large inputs.
/// Falls back to the same percentile of the positive differences when ties
/// make the plain percentile zero.
pub fn pareto_radius<T: Scalar>(sorted: &[T]) -> T {
    let n = sorted.len();
    let sub: Vec<f64> = if n > RADIUS_SUBSAMPLE {
        (0..RADIUS_SUBSAMPLE)
            .map(|i| sorted[i * (n - 1) / (RADIUS_SUBSAMPLE - 1)].as_f64())
            .collect()
    } else {
        sorted.iter().map(|v| v.as_f64()).collect()
    };
    let mut diffs = Vec::with_capacity(sub.len() * (sub.len() - 1) / 2);
    for i in 0..sub.len() {
        for j in i + 1..sub.len() {
            diffs.push(sub[j] - sub[i]);
        }
    }
    let mut r = percentile_in_place(&mut diffs, RADIUS_PERCENTILE);
    if r <= 0.0 {
        let mut positive: Vec<f64> = diffs.into_iter().filter(|d| *d > 0.0).collect();
        r = if positive.is_empty() {
            0.0
        } else {
            percentile_in_place(&mut positive, RADIUS_PERCENTILE)
        };
    }
    T::lit(r)
}

fn percentile_in_place(v: &mut [f64], p: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let k = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    let (_, x, _) = v.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    *x
}

/// Pareto density estimate of `x` on `grid_size` points spanning
/// `[min - r, max + r]`, normalised to unit trapezoid integral.
pub fn pareto_density<T: Scalar>(x: &[T], grid_size: usize) -> Result<DensityEstimate<T>> {
    if x.len() < MIN_SAMPLE {
        return Err(Error::SampleTooSmall {
            needed: MIN_SAMPLE,
            got: x.len(),
        });
    }
    if grid_size < 3 {
        return Err(Error::InvalidArgument("grid_size must be at least 3".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: i,
            col: 0,
            value: x[i].to_string(),
        });
    }
    let mut sorted = x.to_vec();
    sort_scalars(&mut sorted);
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if lo == hi {
        return Ok(spike(lo, n));
    }
    let r = pareto_radius(&sorted);
    let (start, end) = (lo - r, hi + r);
    let step = (end - start) / T::from_count(grid_size - 1);
    let kernel_points: Vec<T> = (0..grid_size)
        .map(|i| if i + 1 == grid_size { end } else { start + step * T::from_count(i) })
        .collect();
    let scale = T::from_count(n) * (r + r);
    let mut densities: Vec<T> = kernel_points
        .iter()
        .map(|&g| {
            let a = sorted.partition_point(|v| *v < g - r);
            let b = sorted.partition_point(|v| *v <= g + r);
            T::from_count(b - a) / scale
        })
        .collect();
    let area = trapezoid(&kernel_points, &densities);
    if area > 0.0 {
        let inv = T::lit(1.0 / area);
        densities.iter_mut().for_each(|d| *d *= inv);
    }
    Ok(DensityEstimate {
        kernel_points,
        densities,
        pareto_radius: r,
        degenerate: false,
        radius_rule: RADIUS_RULE.to_string(),
        sample_size: n,
    })
}

fn spike<T: Scalar>(c: T, n: usize) -> DensityEstimate<T> {
    let eps = (c.abs() * T::lit(1e-6)).max(T::lit(1e-9));
    DensityEstimate {
        kernel_points: vec![c - eps, c, c + eps],
        densities: vec![T::zero(), T::one() / eps, T::zero()],
        pareto_radius: eps,
        degenerate: true,
        radius_rule: RADIUS_RULE.to_string(),
        sample_size: n,
    }
}
