use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::DistanceMatrix;
use super::metric::MetricId;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Where a distance feature came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSource {
    Metric(MetricId),
    Ingested,
}

impl fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSource::Metric(m) => m.fmt(f),
            FeatureSource::Ingested => f.write_str("ingested"),
        }
    }
}

/// Maps each feature entry back to its `(i, j)` observation pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairIndex {
    /// Row-major upper triangle (`i < j`) of an `n x n` matrix.
    UpperTriangle { n: usize },
    Explicit(Vec<(usize, usize)>),
}

/// A vector of pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceFeature<T> {
    values: Vec<T>,
    source: FeatureSource,
    index: PairIndex,
}

impl<T: Scalar> DistanceFeature<T> {
    /// A feature holding `values` with explicit pairs.
    pub fn with_pairs(values: Vec<T>, pairs: Vec<(usize, usize)>, source: FeatureSource) -> Self {
        assert_eq!(values.len(), pairs.len());
        DistanceFeature {
            values,
            source,
            index: PairIndex::Explicit(pairs),
        }
    }

    /// Wraps a raw sample (e.g. values already extracted elsewhere).
    pub fn from_values(values: Vec<T>, source: FeatureSource) -> Self {
        let pairs = (0..values.len()).map(|i| (i, i)).collect();
        Self::with_pairs(values, pairs, source)
    }

    pub fn with_source(mut self, source: FeatureSource) -> Self {
        self.source = source;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> FeatureSource {
        self.source
    }

    pub fn index(&self) -> &PairIndex {
        &self.index
    }

    /// Observation pair of entry `idx`.
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        match &self.index {
            PairIndex::UpperTriangle { n } => upper_triangle_pair(*n, idx),
            PairIndex::Explicit(p) => p[idx],
        }
    }

    /// Rebuilds the full matrix from an upper-triangle feature.
    pub fn to_matrix(&self) -> Result<DistanceMatrix<T>> {
        let PairIndex::UpperTriangle { n } = self.index else {
            return Err(Error::InvalidArgument(
                "only upper-triangle features can be scattered back".into(),
            ));
        };
        let mut values = vec![T::zero(); n * n];
        let mut it = self.values.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().expect("length checked at construction");
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        DistanceMatrix::from_values(n, values)
    }
}

/// `(i, j)` of entry `idx` in the row-major upper triangle of an `n x n` matrix.
pub fn upper_triangle_pair(n: usize, idx: usize) -> (usize, usize) {
    let mut i = 0;
    let mut start = 0;
    loop {
        let row_len = n - i - 1;
        if idx < start + row_len {
            return (i, i + 1 + idx - start);
        }
        start += row_len;
        i += 1;
    }
}

/// Upper triangle of `d` in row-major order, length `n(n-1)/2`.
pub fn extract_distance_feature<T: Scalar>(
    d: &DistanceMatrix<T>,
    source: FeatureSource,
) -> DistanceFeature<T> {
    let n = d.n();
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        values.extend_from_slice(&d.row(i)[i + 1..]);
    }
    DistanceFeature {
        values,
        source,
        index: PairIndex::UpperTriangle { n },
    }
}
