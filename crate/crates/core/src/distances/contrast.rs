use serde::{Deserialize, Serialize};

use super::metric::MetricId;
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nearest/farthest distance from a reference point and their relative
/// contrast `(d_max - d_min) / d_min`, which shrinks as dimension grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport<T> {
    pub d_min: T,
    pub d_max: T,
    pub relative_contrast: T,
    pub reference: Vec<T>,
}

pub fn relative_contrast<T: Scalar>(
    m: &DataMatrix<T>,
    metric: MetricId,
    reference: &[T],
) -> Result<ContrastReport<T>> {
    if reference.len() != m.cols() {
        return Err(Error::SizeMismatch(format!(
            "reference has {} coordinates, data has {}",
            reference.len(),
            m.cols()
        )));
    }
    metric.check_coordinates(m.coordinate_system(), m.cols())?;
    if metric.needs_nonzero_rows() && reference.iter().all(|v| *v == T::zero()) {
        return Err(Error::ZeroVector {
            metric: metric.to_string(),
            rows: vec![],
        });
    }
    let (d_min, d_max) = m
        .iter_rows()
        .map(|r| metric.distance(reference, r))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if d_min == T::zero() {
        return Err(Error::ZeroMinDistance);
    }
    Ok(ContrastReport {
        d_min,
        d_max,
        relative_contrast: (d_max - d_min) / d_min,
        reference: reference.to_vec(),
    })
}
