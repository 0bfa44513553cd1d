use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::CoordinateSystem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed registry of distance metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricId {
    Euclidean,
    Manhattan,
    Chebyshev,
    /// `L_k` norm with `k > 0`; only a metric for `k >= 1`.
    Minkowski(f64),
    Canberra,
    /// Angle between the two vectors, `acos(cos_sim)`, in radians.
    Cosine,
    /// Euclidean distance of the length-normalised vectors, `sqrt(2 (1 - cos_sim))`.
    Chord,
    /// `|r_l - r_j|` on spherical coordinates.
    SphericalRadius,
}

impl MetricId {
    pub const ALL_BASIC: [MetricId; 7] = [
        MetricId::Euclidean,
        MetricId::Manhattan,
        MetricId::Chebyshev,
        MetricId::Canberra,
        MetricId::Cosine,
        MetricId::Chord,
        MetricId::SphericalRadius,
    ];

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Whether the metric satisfies the triangle inequality.
    pub fn is_metric(&self) -> bool {
        !matches!(self, MetricId::Minkowski(k) if *k < 1.0)
    }

    pub fn needs_nonzero_rows(&self) -> bool {
        matches!(self, MetricId::Cosine | MetricId::Chord)
    }

    pub fn check_coordinates(&self, cs: CoordinateSystem, cols: usize) -> Result<()> {
        let ok = match self {
            MetricId::SphericalRadius => cs == CoordinateSystem::Spherical && cols >= 1,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::CoordinateMismatch {
                metric: self.to_string(),
                coordinates: cs.to_string(),
            })
        }
    }

    /// Distance between two rows of equal length.
    ///
    /// Cosine and chord distances assume both vectors are nonzero; callers
    /// check that up front.
    pub fn distance<T: Scalar>(&self, a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            MetricId::Euclidean => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<T>()
                .sqrt(),
            MetricId::Manhattan => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum(),
            MetricId::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y).abs())
                .fold(T::zero(), T::max),
            MetricId::Minkowski(k) => {
                let k = T::lit(k);
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| (x - y).abs().powf(k))
                    .sum::<T>()
                    .powf(T::one() / k)
            }
            MetricId::Canberra => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let den = x.abs() + y.abs();
                    if den == T::zero() {
                        T::zero()
                    } else {
                        (x - y).abs() / den
                    }
                })
                .sum(),
            MetricId::Cosine => cosine_similarity(a, b).acos(),
            MetricId::Chord => {
                let c = cosine_similarity(a, b);
                (T::lit(2.0) * (T::one() - c)).max(T::zero()).sqrt()
            }
            MetricId::SphericalRadius => (a[0] - b[0]).abs(),
        }
    }
}

/// Cosine similarity clamped to `[-1, 1]`; identical rows give exactly 1.
fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> T {
    if a == b {
        return T::one();
    }
    let mut dot = T::zero();
    let mut na = T::zero();
    let mut nb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    (dot / (na.sqrt() * nb.sqrt())).max(-T::one()).min(T::one())
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::Euclidean => f.write_str("euclidean"),
            MetricId::Manhattan => f.write_str("manhattan"),
            MetricId::Chebyshev => f.write_str("chebyshev"),
            MetricId::Minkowski(k) => write!(f, "minkowski:{k}"),
            MetricId::Canberra => f.write_str("canberra"),
            MetricId::Cosine => f.write_str("cosine"),
            MetricId::Chord => f.write_str("chord"),
            MetricId::SphericalRadius => f.write_str("spherical_radius"),
        }
    }
}

impl FromStr for MetricId {
    type Err = Error;

    /// Accepts the display names; Minkowski as `minkowski:3`, `minkowski(3)` or `minkowski3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let m = match s.as_str() {
            "euclidean" | "l2" => MetricId::Euclidean,
            "manhattan" | "l1" | "cityblock" => MetricId::Manhattan,
            "chebyshev" | "maximum" => MetricId::Chebyshev,
            "canberra" => MetricId::Canberra,
            "cosine" => MetricId::Cosine,
            "chord" => MetricId::Chord,
            "spherical_radius" | "radius" => MetricId::SphericalRadius,
            other if other.starts_with("minkowski") => {
                let k = other["minkowski".len()..]
                    .trim_start_matches([':', '('])
                    .trim_end_matches(')');
                let k: f64 = k
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad minkowski exponent in {s:?}")))?;
                if !(k > 0.0 && k.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "minkowski exponent must be > 0, got {k}"
                    )));
                }
                MetricId::Minkowski(k)
            }
            _ => return Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        };
        Ok(m)
    }
}

impl TryFrom<String> for MetricId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MetricId> for String {
    fn from(m: MetricId) -> Self {
        m.to_string()
    }
}
