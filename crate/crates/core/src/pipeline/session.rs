use serde::{Deserialize, Serialize};

use super::scan::{metric_distances, run_scan, DfSummary, ScanResult};
use crate::clustering::{evaluate_eq5, intra_pd, render_eq5_table, Eq5Report, Partition};
use crate::dataset::{CoordinateSystem, DataMatrix};
use crate::density::{md_plot, DipNullCache, MdPlotConfig, MdPlotSpec};
use crate::distances::{DistanceFeature, DistanceMatrix, MetricId};
use crate::error::{Error, Result};
use crate::gmm::{
    bayes_boundaries, chi_square_gof, fit_gmm, qq_data, BayesBoundaries, EmConfig, GmmModel, GmmParams, GofResult,
    QqData,
};

/// Chi-square p-values below this reject the model.
pub const GOF_ALPHA: f64 = 0.05;
/// QQ deviations below this share of the data range count as a straight line.
pub const QQ_GOOD_FRACTION: f64 = 0.05;
/// MD-plot series with fewer values are left out of evaluation plots.
pub const MIN_PLOT_SERIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub plot: MdPlotConfig,
    pub em: EmConfig,
    pub qq_points: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            plot: MdPlotConfig::default(),
            em: EmConfig::default(),
            qq_points: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub coordinates: CoordinateSystem,
}

/// A mixture model of the chosen distance feature with everything derived
/// from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub model: GmmModel<f64>,
    /// Set when the parameters were supplied rather than fitted.
    pub edited: bool,
    pub boundaries: Option<BayesBoundaries<f64>>,
    /// The last boundary: intra-partition distances below, inter above.
    pub bd: Option<f64>,
    pub gof: Option<GofResult>,
    pub gof_error: Option<String>,
    pub qq: QqData<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub name: String,
    pub report: Eq5Report<f64>,
    /// Full distance feature first, then each cluster's intra-partition
    /// distances by descending cluster size.
    pub plot: Option<MdPlotSpec>,
    /// Series too small to draw.
    pub omitted: Vec<String>,
}

/// Result of checking partitions against the current boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub bd: f64,
    pub evaluations: Vec<Evaluation>,
    pub table: String,
}

/// State of one interactive analysis. The distance feature itself is not
/// stored; it is recomputed from `data` and `metric` when needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub config: SessionConfig,
    pub dataset: Option<DatasetInfo>,
    pub data: Option<DataMatrix<f64>>,
    pub scan: Option<ScanResult>,
    pub metric: Option<MetricId>,
    pub df: Option<DfSummary>,
    pub model: Option<ModelState>,
    pub partitions: Vec<(String, Partition)>,
    pub evaluations: Vec<Evaluation>,
    pub table: Option<String>,
    /// Conditions that block a later step, e.g. a missing boundary.
    pub flags: Vec<String>,
}

impl SessionState {
    pub fn new(id: impl Into<String>) -> Self {
        SessionState {
            id: id.into(),
            config: SessionConfig::default(),
            dataset: None,
            data: None,
            scan: None,
            metric: None,
            df: None,
            model: None,
            partitions: Vec::new(),
            evaluations: Vec::new(),
            table: None,
            flags: Vec::new(),
        }
    }

    pub fn bd(&self) -> Option<f64> {
        self.model.as_ref().and_then(|m| m.bd)
    }

    /// Replaces the dataset and drops everything derived from the old one.
    pub fn set_data(&mut self, name: impl Into<String>, data: DataMatrix<f64>) {
        self.dataset = Some(DatasetInfo {
            name: name.into(),
            rows: data.rows(),
            cols: data.cols(),
            coordinates: data.coordinate_system(),
        });
        self.data = Some(data);
        self.scan = None;
        self.metric = None;
        self.df = None;
        self.model = None;
        self.partitions.clear();
        self.evaluations.clear();
        self.table = None;
        self.flags.clear();
    }

    fn data(&self) -> Result<&DataMatrix<f64>> {
        self.data.as_ref().ok_or_else(|| Error::Session("no dataset loaded".into()))
    }

    pub fn run_scan(&mut self, metrics: &[MetricId], cache: &DipNullCache) -> Result<&ScanResult> {
        let scan = run_scan(self.data()?, metrics, &self.config.plot, cache)?;
        Ok(self.scan.insert(scan))
    }

    /// Records the human's metric choice. Any model and evaluation built on
    /// a previous metric is dropped.
    pub fn choose_metric(&mut self, metric: MetricId) -> Result<()> {
        let (_, df) = metric_distances(self.data()?, metric)?;
        self.df = DfSummary::of(df.values());
        self.metric = Some(metric);
        self.model = None;
        self.partitions.clear();
        self.evaluations.clear();
        self.table = None;
        self.flags.clear();
        Ok(())
    }

    pub fn distances(&self) -> Result<(DistanceMatrix<f64>, DistanceFeature<f64>)> {
        let metric = self.metric.ok_or_else(|| Error::Session("no metric chosen".into()))?;
        metric_distances(self.data()?, metric)
    }

    /// Fits an `components`-mode mixture to the chosen distance feature.
    pub fn run_model(&mut self, components: usize, cache: &DipNullCache) -> Result<&ModelState> {
        let (_, df) = self.distances()?;
        let fit = fit_gmm(df.values(), components, &self.config.em)?;
        let warnings = fit.warnings();
        self.apply_model(fit.model, false, warnings, &df, cache)
    }

    /// Installs user-edited parameters; they are validated like any model.
    pub fn set_model_params(&mut self, params: GmmParams<f64>, cache: &DipNullCache) -> Result<&ModelState> {
        let model = GmmModel::try_from(params)?;
        let (_, df) = self.distances()?;
        self.apply_model(model, true, Vec::new(), &df, cache)
    }

    fn apply_model(
        &mut self,
        model: GmmModel<f64>,
        edited: bool,
        mut warnings: Vec<String>,
        df: &DistanceFeature<f64>,
        cache: &DipNullCache,
    ) -> Result<&ModelState> {
        let values = df.values();
        let qq = qq_data(&model, values, self.config.qq_points)?;
        let (gof, gof_error) = match chi_square_gof(&model, values) {
            Ok(g) => (Some(g), None),
            Err(e) => (None, Some(e.to_string())),
        };
        if let Some(g) = &gof {
            if g.p_value < GOF_ALPHA && qq.relative_deviation() < QQ_GOOD_FRACTION {
                warnings.push(format!(
                    "chi-square rejects the model (p = {:.3e}) although the QQ plot deviates by only {:.1}% of the data range",
                    g.p_value,
                    100.0 * qq.relative_deviation()
                ));
            }
        }
        self.flags.clear();
        let m = model.components();
        let boundaries = if m >= 2 { Some(bayes_boundaries(&model)?) } else { None };
        let bd = boundaries.as_ref().and_then(|b| b.last_pair_boundary(m));
        if m < 2 {
            self.flags.push("a Bayes boundary needs at least two components".into());
        } else if bd.is_none() {
            self.flags
                .push(format!("no boundary between components {} and {}", m - 1, m));
        }
        self.model = Some(ModelState {
            model,
            edited,
            boundaries,
            bd,
            gof,
            gof_error,
            qq,
            warnings,
        });
        // reports always refer to the current boundary
        let partitions = std::mem::take(&mut self.partitions);
        self.evaluations.clear();
        self.table = None;
        if bd.is_some() && !partitions.is_empty() {
            self.run_evaluate(partitions, cache)?;
        } else {
            self.partitions = partitions;
        }
        Ok(self.model.as_ref().expect("just set"))
    }

    /// Checks each partition against the current boundary and renders the
    /// comparison table in the order given.
    pub fn run_evaluate(&mut self, partitions: Vec<(String, Partition)>, cache: &DipNullCache) -> Result<&[Evaluation]> {
        let state = self
            .model
            .as_ref()
            .ok_or_else(|| Error::Session("no model fitted".into()))?;
        let bd = state
            .bd
            .ok_or_else(|| Error::Session("the model has no Bayes boundary".into()))?;
        let (d, df) = self.distances()?;
        let boundaries = state.boundaries.as_ref().map(|b| b.boundaries.clone()).unwrap_or_default();
        let mut evaluations = Vec::with_capacity(partitions.len());
        for (name, p) in &partitions {
            let mut report = evaluate_eq5(&d, p, bd)?;
            report.algorithm = name.clone();
            let mut series = vec![("df".to_string(), df.values().to_vec())];
            let mut omitted = Vec::new();
            for c in &report.clusters {
                let label = format!("t{} (n={})", c.cluster, c.size);
                let intra = intra_pd(&d, p, c.cluster)?.into_values();
                if intra.len() < MIN_PLOT_SERIES {
                    omitted.push(label);
                } else {
                    series.push((label, intra));
                }
            }
            let plot = md_plot(&series, Some((&state.model, &boundaries)), &self.config.plot, cache).ok();
            evaluations.push(Evaluation {
                name: name.clone(),
                report,
                plot,
                omitted,
            });
        }
        let reports: Vec<Eq5Report<f64>> = evaluations.iter().map(|e| e.report.clone()).collect();
        self.table = Some(render_eq5_table(&reports));
        self.partitions = partitions;
        self.evaluations = evaluations;
        Ok(&self.evaluations)
    }

    /// The latest evaluation, if any partition has been checked.
    pub fn evaluation_report(&self) -> Option<EvaluationReport> {
        Some(EvaluationReport {
            bd: self.bd()?,
            evaluations: self.evaluations.clone(),
            table: self.table.clone()?,
        })
    }

    /// Plain-text summary of the session.
    pub fn report(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "session {}", self.id);
        if let Some(ds) = &self.dataset {
            let _ = writeln!(out, "dataset {} ({} x {}, {})", ds.name, ds.rows, ds.cols, ds.coordinates);
        }
        if let Some(scan) = &self.scan {
            let _ = writeln!(out, "scan:");
            for e in &scan.entries {
                match e.dip() {
                    Some(d) => {
                        let _ = writeln!(
                            out,
                            "  {:<18} dip {:.4}  p {:.3}{}",
                            e.metric.name(),
                            d.statistic,
                            d.p_value,
                            if e.is_multimodal() { "  multimodal" } else { "" }
                        );
                    }
                    None => {
                        let _ = writeln!(out, "  {:<18} error", e.metric.name());
                    }
                }
            }
            if !scan.has_candidate() {
                let _ = writeln!(out, "  no multimodal candidate");
            }
        }
        if let Some(metric) = self.metric {
            let _ = writeln!(out, "metric {metric}");
        }
        if let Some(m) = &self.model {
            let _ = writeln!(
                out,
                "model: weights {:?} means {:?} sds {:?}",
                round(m.model.weights()),
                round(m.model.means()),
                round(m.model.sds())
            );
            match m.bd {
                Some(bd) => {
                    let _ = writeln!(out, "BD {bd:.4}");
                }
                None => {
                    let _ = writeln!(out, "BD absent");
                }
            }
            match (&m.gof, &m.gof_error) {
                (Some(g), _) => {
                    let _ = writeln!(out, "chi-square p {:.3e} (dof {})", g.p_value, g.dof);
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, "chi-square unavailable: {e}");
                }
                _ => {}
            }
            for w in &m.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
        }
        for f in &self.flags {
            let _ = writeln!(out, "flag: {f}");
        }
        if let Some(t) = &self.table {
            out.push_str(t);
        }
        out
    }
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_two_gaussians;

    fn session() -> (SessionState, crate::dataset::LabelVector) {
        let (m, truth) = generate_two_gaussians::<f64>(40, 0.5, 0.1, 3).unwrap();
        let mut s = SessionState::new("t");
        s.config.plot.n_boot = 100;
        s.config.em.restarts = 2;
        s.set_data("gauss", m);
        (s, truth)
    }

    #[test]
    fn workflow_in_order() {
        let (mut s, truth) = session();
        let cache = DipNullCache::new();
        assert!(s.run_model(2, &cache).is_err());
        s.run_scan(&[MetricId::Euclidean, MetricId::Manhattan], &cache).unwrap();
        s.choose_metric(MetricId::Euclidean).unwrap();
        let bd = s.run_model(2, &cache).unwrap().bd.unwrap();
        let evals = s
            .run_evaluate(vec![("truth".into(), Partition::ingested(truth))], &cache)
            .unwrap();
        assert_eq!(evals[0].report.bd, bd);
        assert_eq!(evals[0].report.algorithm, "truth");
        let plot = evals[0].plot.as_ref().unwrap();
        assert_eq!(plot.series.len(), 3);
        assert_eq!(plot.series[0].label, "df");
        assert!(s.table.as_ref().unwrap().contains("truth"));
        assert!(s.report().contains("BD"));
    }

    #[test]
    fn editing_parameters_refreshes_reports() {
        let (mut s, truth) = session();
        let cache = DipNullCache::new();
        s.choose_metric(MetricId::Euclidean).unwrap();
        s.run_model(2, &cache).unwrap();
        s.run_evaluate(vec![("truth".into(), Partition::ingested(truth))], &cache)
            .unwrap();
        let params = GmmParams {
            weights: vec![0.5, 0.5],
            means: vec![0.2, 1.0],
            sds: vec![0.1, 0.1],
            loglik: None,
            n: 0,
        };
        let state = s.set_model_params(params, &cache).unwrap();
        assert!(state.edited);
        let bd = state.bd.unwrap();
        assert!((bd - 0.6).abs() < 1e-9);
        assert_eq!(s.evaluations[0].report.bd, bd);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let (mut s, _) = session();
        let cache = DipNullCache::new();
        s.choose_metric(MetricId::Euclidean).unwrap();
        let params = GmmParams {
            weights: vec![0.5, 0.6],
            means: vec![0.2, 1.0],
            sds: vec![0.1, 0.1],
            loglik: None,
            n: 0,
        };
        assert!(s.set_model_params(params, &cache).is_err());
        assert!(s.model.is_none());
    }

    #[test]
    fn single_component_flags_missing_boundary() {
        let (mut s, truth) = session();
        let cache = DipNullCache::new();
        s.choose_metric(MetricId::Euclidean).unwrap();
        assert!(s.run_model(1, &cache).unwrap().bd.is_none());
        assert_eq!(s.flags.len(), 1);
        assert!(s
            .run_evaluate(vec![("t".into(), Partition::ingested(truth))], &cache)
            .is_err());
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let (mut s, _) = session();
        let cache = DipNullCache::new();
        s.choose_metric(MetricId::Euclidean).unwrap();
        s.run_model(2, &cache).unwrap();
        let small = Partition::ingested(crate::dataset::LabelVector::new(vec![1, 2, 1]).unwrap());
        assert!(s.run_evaluate(vec![("x".into(), small)], &cache).is_err());
    }

    #[test]
    fn state_round_trips_through_json() {
        let (mut s, _) = session();
        let cache = DipNullCache::new();
        s.choose_metric(MetricId::Euclidean).unwrap();
        s.run_model(2, &cache).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: SessionState = serde_json::from_str(&text).unwrap();
        assert_eq!(back.bd(), s.bd());
        assert_eq!(back.metric, s.metric);
    }
}
