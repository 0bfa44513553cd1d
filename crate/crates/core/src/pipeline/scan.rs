use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{to_spherical, CoordinateSystem, DataMatrix};
use crate::density::{md_plot, DipNullCache, DipResult, MdPlotConfig, MdPlotSpec};
use crate::distances::{
    compute_distance_matrix, extract_distance_feature, DistanceFeature, DistanceMatrix, FeatureSource, MetricId,
};
use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};

/// Dip p-values below this mark a metric as a multimodal candidate. The flag
/// is informational; nothing is selected on the user's behalf.
pub const MULTIMODAL_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfSummary {
    pub n: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl DfSummary {
    pub fn of<T: Scalar>(values: &[T]) -> Option<Self> {
        let min = values.iter().copied().reduce(|a, b| a.min(b))?;
        let max = values.iter().copied().reduce(|a, b| a.max(b))?;
        Some(DfSummary {
            n: values.len(),
            min: min.as_f64(),
            median: median(values)?.as_f64(),
            max: max.as_f64(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ScanOutcome {
    Ok {
        dip: DipResult,
        summary: DfSummary,
        multimodal: bool,
        plot: MdPlotSpec,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScan {
    pub metric: MetricId,
    #[serde(flatten)]
    pub outcome: ScanOutcome,
}

impl MetricScan {
    pub fn dip(&self) -> Option<&DipResult> {
        match &self.outcome {
            ScanOutcome::Ok { dip, .. } => Some(dip),
            ScanOutcome::Error { .. } => None,
        }
    }

    pub fn plot(&self) -> Option<&MdPlotSpec> {
        match &self.outcome {
            ScanOutcome::Ok { plot, .. } => Some(plot),
            ScanOutcome::Error { .. } => None,
        }
    }

    pub fn is_multimodal(&self) -> bool {
        matches!(self.outcome, ScanOutcome::Ok { multimodal: true, .. })
    }
}

/// Scanned metrics, best first: ascending dip p-value, then larger dip
/// statistic, then metric name. Failed metrics follow in request order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub entries: Vec<MetricScan>,
    pub alpha: f64,
}

impl ScanResult {
    pub fn get(&self, metric: MetricId) -> Option<&MetricScan> {
        self.entries.iter().find(|e| e.metric == metric)
    }

    /// Metrics flagged multimodal, in rank order.
    pub fn candidates(&self) -> Vec<MetricId> {
        self.entries
            .iter()
            .filter(|e| e.is_multimodal())
            .map(|e| e.metric)
            .collect()
    }

    pub fn has_candidate(&self) -> bool {
        self.entries.iter().any(MetricScan::is_multimodal)
    }
}

/// The data in the coordinates `metric` expects. Spherical-radius distances
/// on 3-D Cartesian input convert to spherical coordinates first.
pub fn prepare_for_metric<T: Scalar>(data: &DataMatrix<T>, metric: MetricId) -> Result<DataMatrix<T>> {
    if metric == MetricId::SphericalRadius
        && data.coordinate_system() == CoordinateSystem::Cartesian
        && data.cols() == 3
    {
        return to_spherical(data);
    }
    Ok(data.clone())
}

/// Distance matrix and feature of `data` under `metric`.
pub fn metric_distances<T: Scalar>(
    data: &DataMatrix<T>,
    metric: MetricId,
) -> Result<(DistanceMatrix<T>, DistanceFeature<T>)> {
    let prepared = prepare_for_metric(data, metric)?;
    let d = compute_distance_matrix(&prepared, metric)?;
    let df = extract_distance_feature(&d, FeatureSource::Metric(metric));
    Ok((d, df))
}

fn scan_one(
    data: &DataMatrix<f64>,
    metric: MetricId,
    config: &MdPlotConfig,
    cache: &DipNullCache,
) -> Result<ScanOutcome> {
    let (_, df) = metric_distances(data, metric)?;
    let summary = DfSummary::of(df.values()).ok_or_else(|| Error::Empty("distance feature".into()))?;
    let plot = md_plot(&[(metric.name(), df.into_values())], None, config, cache)?;
    let dip = plot.series[0].dip.clone();
    Ok(ScanOutcome::Ok {
        multimodal: dip.p_value < MULTIMODAL_ALPHA,
        dip,
        summary,
        plot,
    })
}

/// Distance feature, dip test and MD plot for each metric. A metric that
/// cannot be computed on this data is reported inline rather than failing
/// the scan.
pub fn run_scan(
    data: &DataMatrix<f64>,
    metrics: &[MetricId],
    config: &MdPlotConfig,
    cache: &DipNullCache,
) -> Result<ScanResult> {
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("scan needs at least one metric".into()));
    }
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for &metric in metrics {
        match scan_one(data, metric, config, cache) {
            Ok(outcome) => ok.push(MetricScan { metric, outcome }),
            Err(e) => failed.push(MetricScan {
                metric,
                outcome: ScanOutcome::Error { message: e.to_string() },
            }),
        }
    }
    ok.sort_by(|a, b| rank_order(a, b));
    ok.extend(failed);
    Ok(ScanResult {
        entries: ok,
        alpha: MULTIMODAL_ALPHA,
    })
}

fn rank_order(a: &MetricScan, b: &MetricScan) -> Ordering {
    let (da, db) = (a.dip().expect("ranked entries succeeded"), b.dip().expect("ranked entries succeeded"));
    da.p_value
        .total_cmp(&db.p_value)
        .then(db.statistic.total_cmp(&da.statistic))
        .then_with(|| a.metric.name().cmp(&b.metric.name()))
}
