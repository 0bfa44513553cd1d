use std::fmt::Write as _;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use super::features::intra_pd;
use super::partition::Partition;
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::{median, robust_sd, Scalar};

/// `median + two_sd <= bd`: the cluster's spread of intra-partition
/// distances stays below the Bayes boundary. Generic so that published
/// decimal summaries can be checked in exact arithmetic.
pub fn criterion_holds<N: Num + PartialOrd + Copy>(median: N, two_sd: N, bd: N) -> bool {
    median + two_sd <= bd
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEq5<T> {
    /// Label in the partition (`1..=k`).
    pub cluster: usize,
    pub size: usize,
    pub n_intra: usize,
    /// `None` for singletons (no intra-partition distances).
    pub median: Option<T>,
    pub robust_sd: Option<T>,
    /// `median + 2 * robust_sd`.
    pub criterion: Option<T>,
    pub pass: Option<bool>,
    /// Intra-partition distances strictly above the boundary.
    pub above_bd: usize,
    pub i_pct: Option<f64>,
}

impl<T> ClusterEq5<T> {
    pub fn is_na(&self) -> bool {
        self.median.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eq5Report<T> {
    pub algorithm: String,
    pub bd: T,
    /// Ordered by descending size, ties by label.
    pub clusters: Vec<ClusterEq5<T>>,
    /// Share of all non-singleton intra-partition distances above `bd`.
    pub i_pct: f64,
    /// Every non-singleton cluster passes.
    pub pass: bool,
}

pub fn evaluate_eq5<T: Scalar>(d: &DistanceMatrix<T>, p: &Partition, bd: T) -> Result<Eq5Report<T>> {
    if !(bd > T::zero()) || !bd.is_finite() {
        return Err(Error::InvalidArgument(format!("Bayes boundary must be positive, got {bd}")));
    }
    p.check_size(d.n())?;
    let sizes = p.labels.sizes();
    let mut order: Vec<usize> = (1..=p.k()).collect();
    order.sort_by(|a, b| sizes[b - 1].cmp(&sizes[a - 1]).then(a.cmp(b)));
    let two = T::lit(2.0);
    let mut clusters = Vec::with_capacity(order.len());
    let (mut above_total, mut intra_total) = (0usize, 0usize);
    for c in order {
        let intra = intra_pd(d, p, c)?;
        let values = intra.values();
        let above = values.iter().filter(|v| **v > bd).count();
        let entry = match (median(values), robust_sd(values)) {
            (Some(m), Some(sd)) => {
                above_total += above;
                intra_total += values.len();
                let crit = m + two * sd;
                ClusterEq5 {
                    cluster: c,
                    size: sizes[c - 1],
                    n_intra: values.len(),
                    median: Some(m),
                    robust_sd: Some(sd),
                    criterion: Some(crit),
                    pass: Some(criterion_holds(m, two * sd, bd)),
                    above_bd: above,
                    i_pct: Some(100.0 * above as f64 / values.len() as f64),
                }
            }
            _ => ClusterEq5 {
                cluster: c,
                size: sizes[c - 1],
                n_intra: 0,
                median: None,
                robust_sd: None,
                criterion: None,
                pass: None,
                above_bd: 0,
                i_pct: None,
            },
        };
        clusters.push(entry);
    }
    let i_pct = if intra_total > 0 {
        100.0 * above_total as f64 / intra_total as f64
    } else {
        0.0
    };
    let pass = clusters.iter().all(|c| c.pass != Some(false));
    Ok(Eq5Report {
        algorithm: p.source.clone(),
        bd,
        clusters,
        i_pct,
        pass,
    })
}

/// Plain-text table with one row per report: algorithm, then
/// `median+2sd` per cluster (failing entries marked `*`, singletons `NA`),
/// then the overall verdict.
pub fn render_eq5_table<T: Scalar>(reports: &[Eq5Report<T>]) -> String {
    let width = reports.iter().map(|r| r.clusters.len()).max().unwrap_or(0);
    let name_w = reports
        .iter()
        .map(|r| r.algorithm.len())
        .max()
        .unwrap_or(0)
        .max("algorithm".len());
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "algorithm");
    for i in 1..=width {
        let _ = write!(out, "  {:>12}", format!("m+2sd(t{i})"));
    }
    let _ = writeln!(out, "  verdict");
    for r in reports {
        let _ = write!(out, "{:<name_w$}", r.algorithm);
        for i in 0..width {
            let cell = match r.clusters.get(i) {
                Some(c) => match (c.median, c.robust_sd, c.pass) {
                    (Some(m), Some(sd), Some(pass)) => format!(
                        "{:.2}+{:.2}{}",
                        m.as_f64(),
                        2.0 * sd.as_f64(),
                        if pass { "" } else { "*" }
                    ),
                    _ => "NA".to_string(),
                },
                None => String::new(),
            };
            let _ = write!(out, "  {cell:>12}");
        }
        let _ = writeln!(out, "  {}", if r.pass { "pass" } else { "fail" });
    }
    out
}
