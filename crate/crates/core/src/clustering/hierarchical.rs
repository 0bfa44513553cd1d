use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Wpgma,
    Ward,
    Median,
    Centroid,
}

impl Linkage {
    pub const ALL: [Linkage; 7] = [
        Linkage::Single,
        Linkage::Complete,
        Linkage::Average,
        Linkage::Wpgma,
        Linkage::Ward,
        Linkage::Median,
        Linkage::Centroid,
    ];

    /// Heights never decrease along the merge sequence.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Linkage::Median | Linkage::Centroid)
    }

    /// Updates run on squared distances; heights are reported as roots.
    fn squared(self) -> bool {
        matches!(self, Linkage::Ward | Linkage::Median | Linkage::Centroid)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Wpgma => "wpgma",
            Linkage::Ward => "ward",
            Linkage::Median => "median",
            Linkage::Centroid => "centroid",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Linkage::ALL
            .into_iter()
            .find(|l| l.as_str() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown linkage {s:?}")))
    }
}

/// One agglomeration step. Leaves are ids `0..n`; the cluster formed by
/// merge `i` gets id `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge<T> {
    pub left: usize,
    pub right: usize,
    pub height: T,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Dendrogram<T> {
    pub n: usize,
    pub linkage: Linkage,
    pub merges: Vec<Merge<T>>,
    /// Merge indices whose height is below the previous merge's.
    pub inversions: Vec<usize>,
}

/// Agglomerative clustering with Lance-Williams updates. At each step the
/// closest pair of active clusters merges; ties go to the lexicographically
/// smallest pair of slots, where a cluster's slot is its smallest member.
pub fn hcluster<T: Scalar>(d: &DistanceMatrix<T>, linkage: Linkage) -> Dendrogram<T> {
    let n = d.n();
    let sq = linkage.squared();
    let mut dist: Vec<T> = d
        .values()
        .iter()
        .map(|&v| if sq { v * v } else { v })
        .collect();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let half = T::lit(0.5);

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, T)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in a + 1..n {
                if !active[b] {
                    continue;
                }
                let v = dist[a * n + b];
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((a, b, v));
                }
            }
        }
        let (a, b, dab) = best.expect("at least two active clusters");
        let (na, nb) = (T::from_count(size[a]), T::from_count(size[b]));
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let dak = dist[a * n + k];
            let dbk = dist[b * n + k];
            let nk = T::from_count(size[k]);
            let updated = match linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
                Linkage::Wpgma => half * (dak + dbk),
                Linkage::Ward => ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk),
                Linkage::Centroid => {
                    let s = na + nb;
                    (na * dak + nb * dbk) / s - na * nb * dab / (s * s)
                }
                Linkage::Median => half * (dak + dbk) - T::lit(0.25) * dab,
            };
            dist[a * n + k] = updated;
            dist[k * n + a] = updated;
        }
        active[b] = false;
        size[a] += size[b];
        let height = if sq { dab.max(T::zero()).sqrt() } else { dab };
        merges.push(Merge {
            left: id[a].min(id[b]),
            right: id[a].max(id[b]),
            height,
            size: size[a],
        });
        id[a] = n + step;
    }
    let inversions = (1..merges.len())
        .filter(|&i| merges[i].height < merges[i - 1].height)
        .collect();
    Dendrogram {
        n,
        linkage,
        merges,
        inversions,
    }
}

/// The partition left after the first `n - k` merges. Cutting by merge
/// order rather than height keeps this well defined for linkages with
/// inversions. Labels are numbered by first appearance.
pub fn cut<T: Scalar>(dend: &Dendrogram<T>, k: usize) -> Result<Partition> {
    let n = dend.n;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot cut {n} points into {k} clusters")));
    }
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, m) in dend.merges.iter().take(n - k).enumerate() {
        let new = n + i;
        let (l, r) = (find(&mut parent, m.left), find(&mut parent, m.right));
        parent[l] = new;
        parent[r] = new;
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Partition::from_assignment(&roots, dend.linkage.as_str())
}
