//! Brute-force dip: for every modal interval `[x_l, x_u]` on sample points,
//! a linear program finds the closest unimodal CDF (convex before `x_l`,
//! linear on the interval, concave after). The dip is the smallest optimum.

use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn brute_force_dip(sample: &[f64]) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let n = x.len();
    let mut best = f64::INFINITY;
    for l in 0..n {
        for u in l..n {
            best = best.min(solve_interval(&x, l, u));
        }
    }
    best
}

fn solve_interval(x: &[f64], l: usize, u: usize) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let t = p.add_var(1.0, (0.0, 1.0));
    let s = p.add_var(0.0, (0.0, f64::INFINITY));
    let g: Vec<Variable> = (0..n).map(|_| p.add_var(0.0, (0.0, 1.0))).collect();

    for i in 0..n {
        // ECDF jumps from i/n to (i+1)/n at x_i
        p.add_constraint(&[(g[i], 1.0), (t, 1.0)], ComparisonOp::Ge, (i + 1) as f64 / nf);
        p.add_constraint(&[(g[i], 1.0), (t, -1.0)], ComparisonOp::Le, i as f64 / nf);
    }

    let inv_h: Vec<f64> = x.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect();
    // slope_k = (g[k+1] - g[k]) / h_k as a list of terms
    let slope = |k: usize| vec![(g[k + 1], inv_h[k]), (g[k], -inv_h[k])];
    // a - b with shared variables merged (the solver wants each index once)
    let diff = |a: Vec<(Variable, f64)>, b: Vec<(Variable, f64)>| {
        let mut merged: BTreeMap<usize, (Variable, f64)> = BTreeMap::new();
        for (v, c) in a.into_iter().chain(b.into_iter().map(|(v, c)| (v, -c))) {
            merged.entry(v.idx()).or_insert((v, 0.0)).1 += c;
        }
        merged.into_values().collect::<Vec<_>>()
    };

    for k in 0..n - 1 {
        p.add_constraint(slope(k), ComparisonOp::Ge, 0.0);
        if k < l {
            if k + 1 < l {
                p.add_constraint(diff(slope(k), slope(k + 1)), ComparisonOp::Le, 0.0);
            } else {
                p.add_constraint(diff(slope(k), vec![(s, 1.0)]), ComparisonOp::Le, 0.0);
            }
        } else if k < u {
            p.add_constraint(diff(slope(k), vec![(s, 1.0)]), ComparisonOp::Eq, 0.0);
        } else {
            if k == u {
                p.add_constraint(diff(slope(k), vec![(s, 1.0)]), ComparisonOp::Le, 0.0);
            }
            if k + 1 < n - 1 {
                p.add_constraint(diff(slope(k + 1), slope(k)), ComparisonOp::Le, 0.0);
            }
        }
    }
    match p.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map(|sol| sol.objective())
            .unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

/// Sample of size 4 to 8 for oracle case `case`.
pub fn seeded_sample(case: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(case);
    let n = 4 + (case % 5) as usize;
    // mix of shapes: uniform, clustered, skewed
    match case % 3 {
        0 => (0..n).map(|_| rng.random::<f64>()).collect(),
        1 => (0..n)
            .map(|i| rng.random::<f64>() * 0.1 + if i % 2 == 0 { 0.0 } else { 1.0 })
            .collect(),
        _ => (0..n).map(|_| rng.random::<f64>().powi(4) * 10.0).collect(),
    }
}
