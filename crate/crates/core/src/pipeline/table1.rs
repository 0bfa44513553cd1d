//! Two Gaussian clusters pulled apart step by step: how dip test, mixture
//! fit and Bayes boundary respond as distance-based structure appears.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::session::GOF_ALPHA;
use crate::clustering::{evaluate_eq5, intra_pd, pooled_inter_pd, Partition};
use crate::dataset::{generate_two_gaussians, DataMatrix};
use crate::density::{dip_test_cached, DipNullCache, DEFAULT_N_BOOT};
use crate::distances::{DistanceMatrix, MetricId};
use crate::error::Result;
use crate::gmm::{bayes_boundaries, chi_square_gof, fit_gmm, EmConfig, GmmModel};
use crate::pipeline::scan::metric_distances;
use crate::scalar::{median, robust_sd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub seeds: Vec<u64>,
    pub shifts: Vec<f64>,
    pub n_per_cluster: usize,
    pub sd: f64,
    pub components: usize,
    pub n_boot: usize,
    /// Seed of the dip null distribution, shared by every run.
    pub dip_seed: u64,
    /// `seed` is replaced by each run's seed.
    pub em: EmConfig,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            seeds: (0..10).collect(),
            shifts: vec![0.1, 0.2, 0.3],
            n_per_cluster: 250,
            sd: 0.1,
            components: 2,
            n_boot: DEFAULT_N_BOOT,
            dip_seed: 0,
            em: EmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Run {
    pub seed: u64,
    pub dip_statistic: f64,
    pub dip_p: f64,
    pub chi_p: Option<f64>,
    pub chi_error: Option<String>,
    /// Chi-square does not reject the model.
    pub valid_gmm: bool,
    pub model: GmmModel<f64>,
    pub bd: Option<f64>,
    pub i_pct: Option<f64>,
    pub median_inter: f64,
    /// `(median, 2 sd)` of each true cluster's intra-partition distances.
    pub clusters: Vec<(f64, f64)>,
}

/// Mean and sample standard deviation over runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Spread {
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub shift: f64,
    pub runs: Vec<Table1Run>,
    pub dip_p: Spread,
    pub chi_p: Option<Spread>,
    pub valid_gmm: usize,
    pub chi_rejects: usize,
    pub bd: Option<Spread>,
    pub i_pct: Option<Spread>,
    pub median_inter: Spread,
    pub cluster_median: Vec<Spread>,
    pub cluster_two_sd: Vec<Spread>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub config: Table1Config,
    pub rows: Vec<Table1Row>,
}

fn run_one(config: &Table1Config, shift: f64, seed: u64, cache: &DipNullCache) -> Result<Table1Run> {
    let (data, truth): (DataMatrix<f64>, _) = generate_two_gaussians(config.n_per_cluster, shift, config.sd, seed)?;
    let (d, df) = metric_distances(&data, MetricId::Euclidean)?;
    let values = df.values();
    let dip = dip_test_cached(values, config.n_boot, config.dip_seed, cache)?;
    let em = EmConfig {
        seed,
        ..config.em.clone()
    };
    let model = fit_gmm(values, config.components, &em)?.model;
    let (chi_p, chi_error) = match chi_square_gof(&model, values) {
        Ok(g) => (Some(g.p_value), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let bd = if model.components() >= 2 {
        bayes_boundaries(&model)?.last_pair_boundary(model.components())
    } else {
        None
    };
    let p = Partition::new(truth, "truth");
    let (i_pct, clusters) = match bd {
        Some(bd) => {
            let r = evaluate_eq5(&d, &p, bd)?;
            let mut by_label = r.clusters.clone();
            by_label.sort_by_key(|c| c.cluster);
            let clusters = by_label
                .iter()
                .map(|c| (c.median.unwrap_or(f64::NAN), 2.0 * c.robust_sd.unwrap_or(f64::NAN)))
                .collect();
            (Some(r.i_pct), clusters)
        }
        None => (None, intra_summaries(&d, &p)?),
    };
    let inter = pooled_inter_pd(&d, &p)?;
    Ok(Table1Run {
        seed,
        dip_statistic: dip.statistic,
        dip_p: dip.p_value,
        valid_gmm: chi_p.is_some_and(|p| p >= GOF_ALPHA),
        chi_p,
        chi_error,
        model,
        bd,
        i_pct,
        median_inter: median(&inter).unwrap_or(f64::NAN),
        clusters,
    })
}

fn intra_summaries(d: &DistanceMatrix<f64>, p: &Partition) -> Result<Vec<(f64, f64)>> {
    (1..=p.k())
        .map(|c| {
            let v = intra_pd(d, p, c)?.into_values();
            Ok((
                median(&v).unwrap_or(f64::NAN),
                2.0 * robust_sd(&v).unwrap_or(f64::NAN),
            ))
        })
        .collect()
}

pub fn run_table1(config: &Table1Config, cache: &DipNullCache) -> Result<Table1Report> {
    let mut rows = Vec::with_capacity(config.shifts.len());
    for &shift in &config.shifts {
        let runs = config
            .seeds
            .iter()
            .map(|&seed| run_one(config, shift, seed, cache))
            .collect::<Result<Vec<_>>>()?;
        rows.push(summarise(shift, runs));
    }
    Ok(Table1Report {
        config: config.clone(),
        rows,
    })
}

fn summarise(shift: f64, runs: Vec<Table1Run>) -> Table1Row {
    let collect = |f: &dyn Fn(&Table1Run) -> Option<f64>| -> Vec<f64> { runs.iter().filter_map(f).collect() };
    let k = runs.iter().map(|r| r.clusters.len()).max().unwrap_or(0);
    let cluster_median = (0..k)
        .filter_map(|i| Spread::of(&collect(&|r| r.clusters.get(i).map(|c| c.0))))
        .collect();
    let cluster_two_sd = (0..k)
        .filter_map(|i| Spread::of(&collect(&|r| r.clusters.get(i).map(|c| c.1))))
        .collect();
    Table1Row {
        shift,
        dip_p: Spread::of(&collect(&|r| Some(r.dip_p))).expect("at least one run"),
        chi_p: Spread::of(&collect(&|r| r.chi_p)),
        valid_gmm: runs.iter().filter(|r| r.valid_gmm).count(),
        chi_rejects: runs.iter().filter(|r| r.chi_p.is_some_and(|p| p < GOF_ALPHA)).count(),
        bd: Spread::of(&collect(&|r| r.bd)),
        i_pct: Spread::of(&collect(&|r| r.i_pct)),
        median_inter: Spread::of(&collect(&|r| Some(r.median_inter))).expect("at least one run"),
        cluster_median,
        cluster_two_sd,
        runs,
    }
}

fn cell(s: Option<&Spread>, digits: usize) -> String {
    match s {
        Some(s) => format!("{:.digits$}±{:.digits$}", s.mean, s.sd),
        None => "/".to_string(),
    }
}

impl Table1Report {
    /// Fixed-width text table, one row per shift, mean±sd over seeds.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let seeds = self.config.seeds.len();
        let _ = writeln!(
            out,
            "{} seeds, {} points per cluster, sd {}, {} components",
            seeds, self.config.n_per_cluster, self.config.sd, self.config.components
        );
        let _ = write!(
            out,
            "{:>5}  {:>13}  {:>26}  {:>6}  {:>11}  {:>11}  {:>11}",
            "shift", "dip p", "chi p", "valid", "BD", "I in %", "m(inter)"
        );
        let k = self.rows.iter().map(|r| r.cluster_median.len()).max().unwrap_or(0);
        for i in 1..=k {
            let _ = write!(out, "  {:>11}", format!("m+2sd(t{i})"));
        }
        out.push('\n');
        for r in &self.rows {
            let chi = if 2 * r.valid_gmm < r.runs.len() {
                format!("{} no valid GMM", cell(r.chi_p.as_ref(), 2))
            } else {
                cell(r.chi_p.as_ref(), 2)
            };
            let _ = write!(
                out,
                "{:>5.2}  {:>13}  {:>26}  {:>6}  {:>11}  {:>11}  {:>11}",
                r.shift,
                cell(Some(&r.dip_p), 3),
                chi,
                format!("{}/{}", r.valid_gmm, r.runs.len()),
                cell(r.bd.as_ref(), 3),
                cell(r.i_pct.as_ref(), 1),
                cell(Some(&r.median_inter), 3)
            );
            for (m, s) in r.cluster_median.iter().zip(&r.cluster_two_sd) {
                let _ = write!(out, "  {:>11}", format!("{:.2}+{:.2}", m.mean, s.mean));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Table1Config {
        Table1Config {
            seeds: vec![1, 2],
            shifts: vec![0.1, 0.5],
            n_per_cluster: 30,
            n_boot: 100,
            em: EmConfig {
                restarts: 2,
                ..EmConfig::default()
            },
            ..Table1Config::default()
        }
    }

    #[test]
    fn reproducible_report() {
        let a = run_table1(&small(), &DipNullCache::new()).unwrap();
        let b = run_table1(&small(), &DipNullCache::new()).unwrap();
        assert_eq!(a.render(), b.render());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.rows[0].runs.len(), 2);
    }

    #[test]
    fn wide_shift_separates() {
        let r = run_table1(&small(), &DipNullCache::new()).unwrap();
        let wide = &r.rows[1];
        assert!(wide.median_inter.mean > 0.9);
        let bd = wide.bd.unwrap().mean;
        assert!(bd > wide.cluster_median[0].mean && bd < wide.median_inter.mean);
    }

    #[test]
    fn spread_basics() {
        let s = Spread::of(&[1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max, s.count), (2.0, 1.0, 3.0, 2));
        assert!((s.sd - 2f64.sqrt()).abs() < 1e-15);
        assert!(Spread::of(&[]).is_none());
    }
}
