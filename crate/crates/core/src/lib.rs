//! Distance-distribution analysis for clustering: choose a metric whose
//! pairwise distances are multimodal, model them with a Gaussian mixture,
//! and check clusterings against the resulting Bayes boundary.

pub mod clustering;
pub mod dataset;
pub mod density;
pub mod distances;
pub mod error;
pub mod gmm;
pub mod pipeline;
pub mod scalar;

pub use clustering::Exact;
pub use error::{Error, Result};

pub type DataMatrix64 = dataset::DataMatrix<f64>;
pub type DataMatrix32 = dataset::DataMatrix<f32>;
pub type DistanceMatrix64 = distances::DistanceMatrix<f64>;
pub type DistanceMatrix32 = distances::DistanceMatrix<f32>;
pub type DistanceFeature64 = distances::DistanceFeature<f64>;
pub type DistanceFeature32 = distances::DistanceFeature<f32>;
pub type GmmModel64 = gmm::GmmModel<f64>;
pub type GmmModel32 = gmm::GmmModel<f32>;
pub type Eq5Report64 = clustering::Eq5Report<f64>;
pub type Eq5Report32 = clustering::Eq5Report<f32>;
pub type Dendrogram64 = clustering::Dendrogram<f64>;
pub type Dendrogram32 = clustering::Dendrogram<f32>;
