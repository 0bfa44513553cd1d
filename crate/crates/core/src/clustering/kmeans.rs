use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::dataset::{CoordinateSystem, DataMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct KMeansResult<T> {
    pub partition: Partition,
    /// Row-major `k x d` centroids, in label order.
    pub centroids: Vec<T>,
    /// Within-cluster sum of squared Euclidean distances.
    pub wcss: T,
    pub iterations: usize,
    pub restart: usize,
}

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` by WCSS.
/// Restart `r` uses the stream seeded with `seed + r`.
pub fn kmeans<T: Scalar>(m: &DataMatrix<T>, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult<T>> {
    let n = m.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} with {n} observations")));
    }
    if m.coordinate_system() != CoordinateSystem::Cartesian {
        return Err(Error::CoordinateMismatch {
            metric: "kmeans".into(),
            coordinates: m.coordinate_system().to_string(),
        });
    }
    let mut best: Option<Run<T>> = None;
    for r in 0..restarts.max(1) {
        let run = lloyd(m, k, seed.wrapping_add(r as u64), r);
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    // relabel by first appearance and permute centroids to match
    let partition = Partition::from_assignment(&best.assign, "kmeans")?;
    let d = m.cols();
    let mut centroids = vec![T::zero(); k * d];
    for (i, &a) in best.assign.iter().enumerate() {
        let l = partition.labels.labels()[i] - 1;
        centroids[l * d..(l + 1) * d].copy_from_slice(&best.centroids[a * d..(a + 1) * d]);
    }
    Ok(KMeansResult {
        partition,
        centroids,
        wcss: best.wcss,
        iterations: best.iterations,
        restart: best.restart,
    })
}

struct Run<T> {
    assign: Vec<usize>,
    centroids: Vec<T>,
    wcss: T,
    iterations: usize,
    restart: usize,
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn plus_plus<T: Scalar>(m: &DataMatrix<T>, k: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let (n, d) = (m.rows(), m.cols());
    let mut centroids = Vec::with_capacity(k * d);
    centroids.extend_from_slice(m.row(rng.random_range(0..n)));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(m.row(i), &centroids[..d]).as_f64()).collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in nearest.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let start = centroids.len();
        centroids.extend_from_slice(m.row(pick));
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(sq_dist(m.row(i), &centroids[start..start + d]).as_f64());
        }
    }
    centroids
}

fn lloyd<T: Scalar>(m: &DataMatrix<T>, k: usize, seed: u64, restart: usize) -> Run<T> {
    let (n, d) = (m.rows(), m.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(m, k, &mut rng);
    let mut assign = vec![usize::MAX; n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let row = m.row(i);
            let mut best = 0;
            let mut best_d = sq_dist(row, &centroids[..d]);
            for c in 1..k {
                let dc = sq_dist(row, &centroids[c * d..(c + 1) * d]);
                if dc < best_d {
                    best = c;
                    best_d = dc;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        // reseed empty clusters at the point farthest from its centroid
        let mut counts = vec![0usize; k];
        assign.iter().for_each(|&a| counts[a] += 1);
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&i, &j| {
                    let di = sq_dist(m.row(i), &centroids[assign[i] * d..(assign[i] + 1) * d]);
                    let dj = sq_dist(m.row(j), &centroids[assign[j] * d..(assign[j] + 1) * d]);
                    di.total_cmp_s(&dj).then(j.cmp(&i))
                });
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                assign[i] = c;
                counts[c] = 1;
                changed = true;
            }
        }
        let mut sums = vec![T::zero(); k * d];
        for (i, &a) in assign.iter().enumerate() {
            for (s, &v) in sums[a * d..(a + 1) * d].iter_mut().zip(m.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let cnt = T::from_count(counts[c]);
                for j in 0..d {
                    centroids[c * d + j] = sums[c * d + j] / cnt;
                }
            }
        }
        if !changed || iterations >= MAX_ITER {
            break;
        }
    }
    let wcss = (0..n)
        .map(|i| sq_dist(m.row(i), &centroids[assign[i] * d..(assign[i] + 1) * d]))
        .sum();
    Run {
        assign,
        centroids,
        wcss,
        iterations,
        restart,
    }
}

/// WCSS of an arbitrary labelling, using each cluster's mean as centre.
pub fn wcss<T: Scalar>(m: &DataMatrix<T>, p: &Partition) -> Result<T> {
    p.check_size(m.rows())?;
    let d = m.cols();
    let mut total = T::zero();
    for members in p.labels.members() {
        let mut c = vec![T::zero(); d];
        for &i in &members {
            for (s, &v) in c.iter_mut().zip(m.row(i)) {
                *s += v;
            }
        }
        let cnt = T::from_count(members.len());
        c.iter_mut().for_each(|v| *v /= cnt);
        total += members.iter().map(|&i| sq_dist(m.row(i), &c)).sum::<T>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabelVector;
    use rand_distr::{Distribution, StandardNormal};

    fn blobs(centres: &[(f64, f64)], per: usize, seed: u64) -> DataMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for &(cx, cy) in centres {
            for _ in 0..per {
                let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                rows.push(vec![cx + a, cy + b]);
            }
        }
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn separated_blobs_split_perfectly() {
        let m = blobs(&[(0.0, 0.0), (10.0, 0.0)], 50, 1);
        let r = kmeans(&m, 2, 7, 3).unwrap();
        let labels = r.partition.labels.labels();
        assert!(labels[..50].iter().all(|&l| l == labels[0]));
        assert!(labels[50..].iter().all(|&l| l == labels[50]));
        assert_ne!(labels[0], labels[50]);
    }

    #[test]
    fn one_cluster_centroid_is_the_mean() {
        let m = blobs(&[(3.0, -1.0)], 40, 2);
        let r = kmeans(&m, 1, 0, 1).unwrap();
        let mean_x = m.column(0).iter().sum::<f64>() / 40.0;
        let mean_y = m.column(1).iter().sum::<f64>() / 40.0;
        assert!((r.centroids[0] - mean_x).abs() < 1e-12);
        assert!((r.centroids[1] - mean_y).abs() < 1e-12);
        assert!((r.wcss - wcss(&m, &r.partition).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn beats_random_labellings() {
        let m = blobs(&[(0.0, 0.0), (6.0, 0.0), (3.0, 5.0)], 30, 3);
        let r = kmeans(&m, 3, 1, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let mut raw: Vec<usize> = (0..90).map(|_| rng.random_range(1..=3)).collect();
            raw[0] = 1;
            raw[1] = 2;
            raw[2] = 3;
            let p = Partition::ingested(LabelVector::new(raw).unwrap());
            assert!(r.wcss <= wcss(&m, &p).unwrap());
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let m = blobs(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)], 20, 4);
        assert_eq!(kmeans(&m, 3, 5, 4).unwrap(), kmeans(&m, 3, 5, 4).unwrap());
    }

    #[test]
    fn duplicate_points_do_not_leave_empty_clusters() {
        let mut rows = vec![vec![0.0, 0.0]; 10];
        rows.push(vec![1.0, 1.0]);
        let m = DataMatrix::from_rows(&rows).unwrap();
        let r = kmeans(&m, 3, 0, 2).unwrap();
        assert_eq!(r.partition.k(), 3);
    }

    #[test]
    fn rejects_bad_k_and_spherical_input() {
        let m = blobs(&[(0.0, 0.0)], 5, 5);
        assert!(kmeans(&m, 0, 0, 1).is_err());
        assert!(kmeans(&m, 6, 0, 1).is_err());
    }
}
