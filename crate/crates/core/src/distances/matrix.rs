use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metric::MetricId;
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense symmetric `n x n` distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Wraps row-major values without checking metric properties; see
    /// [`validate_distance_matrix`].
    pub fn from_values(n: usize, values: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDistanceMatrix(format!("need n >= 2, got {n}")));
        }
        if values.len() != n * n {
            return Err(Error::InvalidDistanceMatrix(format!(
                "{} values for a {n}x{n} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistanceMatrix("non-finite entry".into()));
        }
        Ok(DistanceMatrix { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        DistanceMatrix {
            n: self.n,
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }
}

fn check_rows<T: Scalar>(m: &DataMatrix<T>, metric: MetricId) -> Result<()> {
    metric.check_coordinates(m.coordinate_system(), m.cols())?;
    if let MetricId::Minkowski(k) = metric {
        if !(k > 0.0) {
            return Err(Error::InvalidArgument(format!("minkowski exponent {k} must be > 0")));
        }
    }
    if metric.needs_nonzero_rows() {
        let zero: Vec<usize> = m
            .iter_rows()
            .enumerate()
            .filter(|(_, r)| r.iter().all(|v| *v == T::zero()))
            .map(|(i, _)| i)
            .collect();
        if !zero.is_empty() {
            return Err(Error::ZeroVector {
                metric: metric.to_string(),
                rows: zero,
            });
        }
    }
    Ok(())
}

fn upper_row<T: Scalar>(m: &DataMatrix<T>, metric: MetricId, i: usize) -> Vec<T> {
    let a = m.row(i);
    ((i + 1)..m.rows()).map(|j| metric.distance(a, m.row(j))).collect()
}

fn assemble<T: Scalar>(n: usize, upper: Vec<Vec<T>>) -> DistanceMatrix<T> {
    let mut values = vec![T::zero(); n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    DistanceMatrix { n, values }
}

/// Pairwise distances of all rows, computed in parallel over rows. Each
/// entry is evaluated once, so the result does not depend on the number of
/// worker threads.
pub fn compute_distance_matrix<T: Scalar>(
    m: &DataMatrix<T>,
    metric: MetricId,
) -> Result<DistanceMatrix<T>> {
    check_rows(m, metric)?;
    let upper: Vec<Vec<T>> = (0..m.rows())
        .into_par_iter()
        .map(|i| upper_row(m, metric, i))
        .collect();
    Ok(assemble(m.rows(), upper))
}

/// Single-threaded counterpart of [`compute_distance_matrix`].
pub fn compute_distance_matrix_serial<T: Scalar>(
    m: &DataMatrix<T>,
    metric: MetricId,
) -> Result<DistanceMatrix<T>> {
    check_rows(m, metric)?;
    let upper = (0..m.rows()).map(|i| upper_row(m, metric, i)).collect();
    Ok(assemble(m.rows(), upper))
}

pub const DEFAULT_TRIANGLE_SAMPLES: usize = 10_000;
const EXHAUSTIVE_TRIANGLE_MAX_N: usize = 50;
const MAX_LISTED_VIOLATIONS: usize = 100;

/// Metric-property audit of a distance matrix. Violations are findings,
/// not errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub max_asymmetry: f64,
    pub max_abs_diagonal: f64,
    pub negative_count: usize,
    /// Off-diagonal zeros (duplicate observations).
    pub zero_off_diagonal_count: usize,
    pub triangle_exhaustive: bool,
    pub triangle_checked: usize,
    pub triangle_violations: usize,
    /// Violating triples `(i, j, k)` with `D_ij > D_ik + D_kj`, 0-based, at most 100.
    pub violating_triples: Vec<(usize, usize, usize)>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.max_asymmetry == 0.0
            && self.max_abs_diagonal == 0.0
            && self.negative_count == 0
            && self.triangle_violations == 0
    }
}

pub fn validate_distance_matrix<T: Scalar>(
    d: &DistanceMatrix<T>,
    triangle_samples: usize,
) -> ValidationReport {
    let n = d.n();
    let mut max_asymmetry = 0.0f64;
    let mut max_abs_diagonal = 0.0f64;
    let mut negative_count = 0;
    let mut zero_off_diagonal_count = 0;
    for i in 0..n {
        max_abs_diagonal = max_abs_diagonal.max(d.get(i, i).as_f64().abs());
        for j in 0..n {
            let v = d.get(i, j);
            if v < T::zero() {
                negative_count += 1;
            }
            if j > i {
                max_asymmetry = max_asymmetry.max((v - d.get(j, i)).as_f64().abs());
                if v == T::zero() {
                    zero_off_diagonal_count += 1;
                }
            }
        }
    }

    let mut checked = 0;
    let mut violations = 0;
    let mut listed = Vec::new();
    let mut check = |i: usize, j: usize, k: usize| {
        checked += 1;
        let direct = d.get(i, j).as_f64();
        let detour = d.get(i, k).as_f64() + d.get(k, j).as_f64();
        if direct > detour + 1e-12 * detour.abs().max(1.0) {
            violations += 1;
            if listed.len() < MAX_LISTED_VIOLATIONS {
                listed.push((i, j, k));
            }
        }
    };
    let exhaustive = n <= EXHAUSTIVE_TRIANGLE_MAX_N;
    if exhaustive {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    if k != i && k != j {
                        check(i, j, k);
                    }
                }
            }
        }
    } else if n >= 3 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7472_6961);
        for _ in 0..triangle_samples {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut k = rng.random_range(0..n);
            while k == i || k == j {
                k = rng.random_range(0..n);
            }
            check(i, j, k);
        }
    }

    ValidationReport {
        n,
        max_asymmetry,
        max_abs_diagonal,
        negative_count,
        zero_off_diagonal_count,
        triangle_exhaustive: exhaustive,
        triangle_checked: checked,
        triangle_violations: violations,
        violating_triples: listed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_data(n: usize, d: usize, seed: u64) -> DataMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn identical_rows_have_zero_distance() {
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        for metric in [MetricId::Euclidean, MetricId::Canberra, MetricId::Chord, MetricId::Cosine] {
            let d = compute_distance_matrix(&m, metric).unwrap();
            assert_eq!(d.get(0, 1), 0.0, "{metric}");
        }
    }

    #[test]
    fn euclidean_matches_double_loop() {
        let m = gaussian_data(10, 4, 3);
        let d = compute_distance_matrix(&m, MetricId::Euclidean).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let mut s = 0.0;
                for c in 0..4 {
                    let diff = m.row(i)[c] - m.row(j)[c];
                    s += diff * diff;
                }
                assert!((d.get(i, j) - s.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_vector_rejected_for_angular_metrics() {
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        match compute_distance_matrix(&m, MetricId::Chord) {
            Err(Error::ZeroVector { rows, .. }) => assert_eq!(rows, vec![1]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(compute_distance_matrix(&m, MetricId::Euclidean).is_ok());
    }

    #[test]
    fn radius_metric_needs_spherical_data() {
        let m = gaussian_data(5, 3, 1);
        assert!(matches!(
            compute_distance_matrix(&m, MetricId::SphericalRadius),
            Err(Error::CoordinateMismatch { .. })
        ));
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let m = gaussian_data(120, 6, 8);
        for metric in MetricId::ALL_BASIC.iter().copied().filter(|m| *m != MetricId::SphericalRadius) {
            let par = compute_distance_matrix(&m, metric).unwrap();
            let ser = compute_distance_matrix_serial(&m, metric).unwrap();
            let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
            let par3 = pool.install(|| compute_distance_matrix(&m, metric).unwrap());
            assert_eq!(par, ser);
            assert_eq!(par3, ser);
        }
    }

    #[test]
    fn registry_metrics_pass_exhaustive_check() {
        for seed in 0..3 {
            let m = gaussian_data(30, 5, seed);
            let sph = crate::dataset::to_spherical(&gaussian_data(30, 3, seed + 100)).unwrap();
            for metric in MetricId::ALL_BASIC.iter().copied().chain([MetricId::Minkowski(3.0)]) {
                let d = if metric == MetricId::SphericalRadius {
                    compute_distance_matrix(&sph, metric).unwrap()
                } else {
                    compute_distance_matrix(&m, metric).unwrap()
                };
                let report = validate_distance_matrix(&d, DEFAULT_TRIANGLE_SAMPLES);
                assert!(report.triangle_exhaustive);
                assert!(report.is_clean(), "{metric}: {report:?}");
            }
        }
    }

    #[test]
    fn constructed_triangle_violation() {
        let d = DistanceMatrix::from_values(3, vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]).unwrap();
        let r = validate_distance_matrix(&d, 10);
        assert_eq!(r.triangle_violations, 1);
        assert_eq!(r.violating_triples, vec![(0, 2, 1)]);
    }

    #[test]
    fn asymmetry_is_flagged() {
        let d = DistanceMatrix::from_values(2, vec![0.0, 1.0, 1.5, 0.0]).unwrap();
        let r = validate_distance_matrix(&d, 10);
        assert_eq!(r.max_asymmetry, 0.5);
        assert!(!r.is_clean());
    }

    #[test]
    fn sampled_check_on_large_matrix() {
        let m = gaussian_data(80, 3, 5);
        let d = compute_distance_matrix(&m, MetricId::Manhattan).unwrap();
        let r = validate_distance_matrix(&d, 2_000);
        assert!(!r.triangle_exhaustive);
        assert_eq!(r.triangle_checked, 2_000);
        assert_eq!(r.triangle_violations, 0);
    }
}
