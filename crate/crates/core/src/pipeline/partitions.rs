use serde::{Deserialize, Serialize};

use super::session::SessionState;
use crate::clustering::{cut, hcluster, kmeans, Linkage, Partition};
use crate::dataset::LabelVector;
use crate::error::{Error, Result};

fn default_restarts() -> usize {
    10
}

/// How to obtain a clustering for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum PartitionMethod {
    /// Labels supplied by the caller, any integers.
    Labels { labels: Vec<i64> },
    /// Agglomerative clustering of the session's distances, cut at `k`.
    Hierarchical { linkage: Linkage, k: usize },
    /// k-means on the session's data.
    Kmeans {
        k: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_restarts")]
        restarts: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub method: PartitionMethod,
}

impl SessionState {
    pub fn build_partition(&self, spec: &PartitionSpec) -> Result<(String, Partition)> {
        let p = match &spec.method {
            PartitionMethod::Labels { labels } => Partition::ingested(LabelVector::from_raw(labels)?),
            PartitionMethod::Hierarchical { linkage, k } => {
                let (d, _) = self.distances()?;
                cut(&hcluster(&d, *linkage), *k)?
            }
            PartitionMethod::Kmeans { k, seed, restarts } => {
                let data = self
                    .data
                    .as_ref()
                    .ok_or_else(|| Error::Session("no dataset loaded".into()))?;
                kmeans(data, *k, *seed, *restarts)?.partition
            }
        };
        let name = spec.name.clone().unwrap_or_else(|| p.source.clone());
        Ok((name, p))
    }

    pub fn build_partitions(&self, specs: &[PartitionSpec]) -> Result<Vec<(String, Partition)>> {
        specs.iter().map(|s| self.build_partition(s)).collect()
    }
}
