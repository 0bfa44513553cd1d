use serde::{Deserialize, Serialize};

use super::model::GmmModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SCAN_POINTS: usize = 1000;

/// Points where adjacent mixture components are equally probable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesBoundaries<T> {
    /// Ascending boundary locations.
    pub boundaries: Vec<T>,
    /// `p(c_i | b)` of the left component at each boundary.
    pub posterior_at_boundary: Vec<T>,
    /// Component pair `(i, i + 1)` each boundary separates.
    pub pairs: Vec<(usize, usize)>,
    /// Adjacent pairs with no dominance switch between their means.
    pub missing: Vec<(usize, usize)>,
}

impl<T: Scalar> BayesBoundaries<T> {
    /// The boundary between the last two components, if it exists. This is
    /// the one separating intra- from inter-partition distances.
    pub fn last_pair_boundary(&self, components: usize) -> Option<T> {
        if components < 2 {
            return None;
        }
        let last = (components - 2, components - 1);
        self.pairs
            .iter()
            .position(|p| *p == last)
            .map(|i| self.boundaries[i])
    }
}

/// For each adjacent pair of components, the point in `(m_i, m_{i+1})`
/// where `w_i N_i` hands dominance to `w_{i+1} N_{i+1}`, located by a grid
/// scan followed by bisection to machine precision.
pub fn bayes_boundaries<T: Scalar>(model: &GmmModel<T>) -> Result<BayesBoundaries<T>> {
    let m = model.components();
    if m < 2 {
        return Err(Error::InvalidModel(
            "Bayes boundaries need at least two components".into(),
        ));
    }
    let mut out = BayesBoundaries {
        boundaries: Vec::new(),
        posterior_at_boundary: Vec::new(),
        pairs: Vec::new(),
        missing: Vec::new(),
    };
    for i in 0..m - 1 {
        let j = i + 1;
        let lo = model.means()[i].as_f64();
        let hi = model.means()[j].as_f64();
        // positive while component i dominates component j
        let gap = |x: f64| -> f64 {
            let xt = T::lit(x);
            (model.component_log_density(i, xt) - model.component_log_density(j, xt)).as_f64()
        };
        let root = if hi > lo {
            find_switch(&gap, lo, hi).map(|(b, a, c)| polish(model, i, j, &gap, b, a, c))
        } else {
            None
        };
        match root {
            Some(b) => {
                let bt = T::lit(b);
                out.boundaries.push(bt);
                out.posterior_at_boundary.push(model.posterior(bt)[i]);
                out.pairs.push((i, j));
            }
            None => out.missing.push((i, j)),
        }
    }
    Ok(out)
}

/// Returns the bisection estimate together with the grid bracket it came from.
fn find_switch(gap: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<(f64, f64, f64)> {
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut a = lo;
    let mut ga = gap(a);
    for k in 1..=SCAN_POINTS {
        let b = if k == SCAN_POINTS { hi } else { lo + step * k as f64 };
        let gb = gap(b);
        if ga == 0.0 && gb < 0.0 {
            return Some((a, a, b));
        }
        if ga > 0.0 && gb <= 0.0 {
            return Some((bisect(gap, a, b), a, b));
        }
        a = b;
        ga = gb;
    }
    None
}

/// The log-density gap of two normals is a quadratic in `x`; its root inside
/// the bracket replaces the bisection estimate when it is at least as good.
/// This recovers exact answers such as the midpoint of a symmetric pair.
fn polish<T: Scalar>(
    model: &GmmModel<T>,
    i: usize,
    j: usize,
    gap: &impl Fn(f64) -> f64,
    estimate: f64,
    a: f64,
    b: f64,
) -> f64 {
    let (wi, mi, si) = (model.weights()[i].as_f64(), model.means()[i].as_f64(), model.sds()[i].as_f64());
    let (wj, mj, sj) = (model.weights()[j].as_f64(), model.means()[j].as_f64(), model.sds()[j].as_f64());
    let (vi, vj) = (si * si, sj * sj);
    let qa = 0.5 / vj - 0.5 / vi;
    let qb = mi / vi - mj / vj;
    let qc = (wi / wj).ln() + (sj / si).ln() - 0.5 * mi * mi / vi + 0.5 * mj * mj / vj;
    let mut candidates = Vec::with_capacity(2);
    if qa.abs() <= 1e-12 * (qb.abs() + qc.abs()) || qa == 0.0 {
        if qb != 0.0 {
            candidates.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            if q != 0.0 {
                candidates.push(q / qa);
                candidates.push(qc / q);
            }
        }
    }
    let mut best = estimate;
    let mut best_gap = gap(estimate).abs();
    for c in candidates {
        if c >= a && c <= b {
            let g = gap(c).abs();
            if g <= best_gap {
                best = c;
                best_gap = g;
            }
        }
    }
    best
}

/// `gap(a) > 0 >= gap(b)`; shrinks the bracket until it stops moving.
fn bisect(gap: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let g = gap(mid);
        if g == 0.0 {
            return mid;
        }
        if g > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    if gap(b).abs() < gap(a).abs() {
        b
    } else {
        a
    }
}
