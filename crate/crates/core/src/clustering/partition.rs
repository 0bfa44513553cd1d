use serde::{Deserialize, Serialize};

use crate::dataset::LabelVector;
use crate::error::{Error, Result};

/// A labelling of `n` observations into `k` disjoint clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: LabelVector,
    /// Algorithm that produced the labels, or `"ingested"`.
    pub source: String,
}

impl Partition {
    pub fn new(labels: LabelVector, source: impl Into<String>) -> Self {
        Partition {
            labels,
            source: source.into(),
        }
    }

    pub fn ingested(labels: LabelVector) -> Self {
        Self::new(labels, "ingested")
    }

    /// Relabels clusters `1..=k` by first appearance.
    pub fn from_assignment(assignment: &[usize], source: impl Into<String>) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels = assignment
            .iter()
            .map(|a| {
                let next = map.len() + 1;
                *map.entry(*a).or_insert(next)
            })
            .collect();
        Ok(Self::new(LabelVector::new(labels)?, source))
    }

    pub fn k(&self) -> usize {
        self.labels.k()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub(crate) fn check_cluster(&self, cluster: usize) -> Result<()> {
        if cluster == 0 || cluster > self.k() {
            return Err(Error::InvalidArgument(format!(
                "cluster {cluster} outside 1..={}",
                self.k()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_size(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::SizeMismatch(format!(
                "partition has {} labels, distance matrix has {n} rows",
                self.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_is_relabelled_by_first_appearance() {
        let p = Partition::from_assignment(&[7, 7, 2, 9, 2], "x").unwrap();
        assert_eq!(p.labels.labels(), &[1, 1, 2, 3, 2]);
        assert_eq!(p.k(), 3);
        assert!(p.check_cluster(0).is_err());
        assert!(p.check_cluster(3).is_ok());
        assert!(p.check_size(4).is_err());
    }
}
