//! Baseline clusterers, intra/inter-partition distance features and the
//! boundary criterion on cluster spreads.

mod accuracy;
mod eq5;
mod features;
mod hierarchical;
mod kmeans;
mod partition;
mod published;

pub use accuracy::accuracy;
pub use eq5::{criterion_holds, evaluate_eq5, render_eq5_table, ClusterEq5, Eq5Report};
pub use features::{inter_pd, intra_pd, pooled_inter_pd, pooled_intra_pd};
pub use hierarchical::{cut, hcluster, Dendrogram, Linkage, Merge};
pub use kmeans::{kmeans, wcss, KMeansResult};
pub use partition::Partition;
pub use published::{
    evaluate_published, parse_decimal, parse_published, Exact, PublishedRow, PublishedVerdict,
};
