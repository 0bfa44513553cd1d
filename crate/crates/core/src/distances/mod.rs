//! Distance matrices under a closed registry of metrics, the distance
//! feature (upper triangle) and the relative-contrast diagnostic.

mod contrast;
mod feature;
mod io;
mod matrix;
mod metric;

pub use contrast::{relative_contrast, ContrastReport};
pub use feature::{extract_distance_feature, upper_triangle_pair, DistanceFeature, FeatureSource, PairIndex};
pub use io::{load_distance_matrix, parse_distance_matrix, write_distance_matrix};
pub use matrix::{
    compute_distance_matrix, compute_distance_matrix_serial, validate_distance_matrix, DistanceMatrix,
    ValidationReport, DEFAULT_TRIANGLE_SAMPLES,
};
pub use metric::MetricId;
