//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the numeric core is generic over (`f32` and `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self;

    fn from_count(n: usize) -> Self;

    fn as_f64(self) -> f64;

    /// Total order on non-NaN values.
    fn total_cmp_s(&self, other: &Self) -> std::cmp::Ordering;
}

macro_rules! impl_scalar {
    ($($ty:ty),*) => {
        $(
            impl Scalar for $ty {
                #[inline]
                fn lit(x: f64) -> Self {
                    x as $ty
                }

                #[inline]
                fn from_count(n: usize) -> Self {
                    n as $ty
                }

                #[inline]
                fn as_f64(self) -> f64 {
                    self as f64
                }

                #[inline]
                fn total_cmp_s(&self, other: &Self) -> std::cmp::Ordering {
                    self.total_cmp(other)
                }
            }
        )*
    };
}

impl_scalar!(f32, f64);

/// Sorts a slice of scalars ascending (NaN-free input assumed).
pub fn sort_scalars<T: Scalar>(values: &mut [T]) {
    values.sort_unstable_by(|a, b| a.total_cmp_s(b));
}

/// Median of an unsorted sample; averages the middle pair for even sizes.
pub fn median<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    sort_scalars(&mut v);
    Some(median_sorted(&v))
}

pub(crate) fn median_sorted<T: Scalar>(sorted: &[T]) -> T {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::lit(2.0)
    }
}

/// Robust standard deviation, `1.4826 * MAD`.
pub fn robust_sd<T: Scalar>(values: &[T]) -> Option<T> {
    let m = median(values)?;
    let dev: Vec<T> = values.iter().map(|&x| (x - m).abs()).collect();
    median(&dev).map(|mad| T::lit(1.4826) * mad)
}

/// Hazen (type 5) sample quantile of a sorted sample: order statistic `k`
/// (1-based) sits at probability `(k - 0.5) / n`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    let pos = p * n as f64 + 0.5;
    if pos <= 1.0 {
        return sorted[0];
    }
    if pos >= n as f64 {
        return sorted[n - 1];
    }
    let lo = pos.floor() as usize;
    let frac = T::lit(pos - lo as f64);
    sorted[lo - 1] + (sorted[lo] - sorted[lo - 1]) * frac
}

/// Arithmetic mean and population (ML) standard deviation.
pub fn mean_sd<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}
