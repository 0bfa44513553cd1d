//! Agglomeration by definition: every step recomputes each linkage distance
//! from the cluster members (or their coordinates) instead of updating a
//! matrix.

use distmodes::clustering::Linkage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One oracle merge: child ids (leaves `0..n`, merge `i` is `n + i`), sorted,
/// and height.
pub type OracleMerge = (usize, usize, f64);

struct Cluster {
    id: usize,
    members: Vec<usize>,
    /// Leaf weights `2^-depth` inside this cluster's tree.
    depth_weights: Vec<f64>,
}

fn weighted_centroid(points: &[Vec<f64>], c: &Cluster, by_depth: bool) -> Vec<f64> {
    let dim = points[0].len();
    let mut out = vec![0.0; dim];
    let uniform = 1.0 / c.members.len() as f64;
    for (k, &m) in c.members.iter().enumerate() {
        let w = if by_depth { c.depth_weights[k] } else { uniform };
        for j in 0..dim {
            out[j] += w * points[m][j];
        }
    }
    out
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn linkage_distance(
    linkage: Linkage,
    d: &[Vec<f64>],
    points: Option<&[Vec<f64>]>,
    a: &Cluster,
    b: &Cluster,
) -> f64 {
    let pairs = || a.members.iter().flat_map(|&i| b.members.iter().map(move |&j| d[i][j]));
    match linkage {
        Linkage::Single => pairs().fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs().fold(f64::NEG_INFINITY, f64::max),
        Linkage::Average => pairs().sum::<f64>() / (a.members.len() * b.members.len()) as f64,
        Linkage::Wpgma => {
            let mut s = 0.0;
            for (x, &i) in a.members.iter().enumerate() {
                for (y, &j) in b.members.iter().enumerate() {
                    s += a.depth_weights[x] * b.depth_weights[y] * d[i][j];
                }
            }
            s
        }
        Linkage::Ward => {
            let p = points.expect("ward needs coordinates");
            let (na, nb) = (a.members.len() as f64, b.members.len() as f64);
            let gap = euclid(&weighted_centroid(p, a, false), &weighted_centroid(p, b, false));
            (2.0 * na * nb / (na + nb)).sqrt() * gap
        }
        Linkage::Centroid => {
            let p = points.expect("centroid needs coordinates");
            euclid(&weighted_centroid(p, a, false), &weighted_centroid(p, b, false))
        }
        Linkage::Median => {
            let p = points.expect("median needs coordinates");
            euclid(&weighted_centroid(p, a, true), &weighted_centroid(p, b, true))
        }
    }
}

/// Naive agglomeration over the full matrix `d`. Geometric linkages (ward,
/// centroid, median) read the coordinates `points` that generated `d`.
pub fn naive_agglomerate(linkage: Linkage, d: &[Vec<f64>], points: Option<&[Vec<f64>]>) -> Vec<OracleMerge> {
    let n = d.len();
    let mut active: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            id: i,
            members: vec![i],
            depth_weights: vec![1.0],
        })
        .collect();
    let mut out = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let v = linkage_distance(linkage, d, points, &active[x], &active[y]);
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        let (h, x, y) = best;
        let b = active.remove(y);
        let a = active.remove(x);
        out.push((a.id.min(b.id), a.id.max(b.id), h));
        let mut members = a.members;
        members.extend(&b.members);
        let mut depth_weights: Vec<f64> = a.depth_weights.iter().map(|w| w / 2.0).collect();
        depth_weights.extend(b.depth_weights.iter().map(|w| w / 2.0));
        active.push(Cluster {
            id: n + step,
            members,
            depth_weights,
        });
    }
    out
}

/// Random symmetric matrix with zero diagonal and entries in `(0, 1)`.
pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random::<f64>() + 1e-3;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

pub fn random_points(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

pub fn euclidean_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| euclid(a, b)).collect())
        .collect()
}

/// Inputs for oracle case `case`: the matrix, and the points for geometric
/// linkages. Sizes run from 2 to 12.
pub fn oracle_case(linkage: Linkage, case: u64) -> (Vec<Vec<f64>>, Option<Vec<Vec<f64>>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(case * 31 + 7);
    let n = 2 + (case % 11) as usize;
    match linkage {
        Linkage::Ward | Linkage::Centroid | Linkage::Median => {
            let p = random_points(n, 1 + (case % 3) as usize, &mut rng);
            (euclidean_matrix(&p), Some(p))
        }
        _ => (random_matrix(n, &mut rng), None),
    }
}
