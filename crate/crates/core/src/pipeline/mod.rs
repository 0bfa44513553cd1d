//! End-to-end workflow: scan metrics, let the user choose one, model its
//! distance distribution, derive the boundary, check clusterings.

mod partitions;
mod scan;
mod session;
mod table1;

pub use scan::{
    metric_distances, prepare_for_metric, run_scan, DfSummary, MetricScan, ScanOutcome, ScanResult,
    MULTIMODAL_ALPHA,
};
pub use partitions::{PartitionMethod, PartitionSpec};
pub use session::{
    DatasetInfo, Evaluation, EvaluationReport, ModelState, SessionConfig, SessionState, GOF_ALPHA, MIN_PLOT_SERIES, QQ_GOOD_FRACTION,
};
pub use table1::{run_table1, Spread, Table1Config, Table1Report, Table1Row, Table1Run};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A JSON document with a top-level `"schema"` version next to the fields
/// of `body`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Versioned {
            schema: SCHEMA_VERSION,
            body,
        }
    }
}

pub fn to_json<T: Serialize>(body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned::new(body))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let v: Versioned<T> = serde_json::from_str(text)?;
    if v.schema != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported schema {}, expected {SCHEMA_VERSION}",
            v.schema
        )));
    }
    Ok(v.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmm::GmmModel;

    #[test]
    fn schema_field_is_top_level() {
        let m = GmmModel::new(vec![0.5, 0.5], vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let text = to_json(&m).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["means"][1], 1.0);
        let back: GmmModel<f64> = from_json(&text).unwrap();
        assert_eq!(back, m);
        assert!(from_json::<GmmModel<f64>>(&text.replace("\"schema\": 1", "\"schema\": 2")).is_err());
    }
}
