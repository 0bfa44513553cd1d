use super::partition::Partition;
use crate::dataset::LabelVector;
use crate::error::{Error, Result};

const EXHAUSTIVE_MAX_K: usize = 6;

/// Best fraction of agreeing labels over all one-to-one matchings between
/// predicted and true clusters. Clusters left unmatched (when the counts
/// differ) contribute nothing.
pub fn accuracy(p: &Partition, truth: &LabelVector) -> Result<f64> {
    if p.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "{} predicted labels, {} true labels",
            p.len(),
            truth.len()
        )));
    }
    let k = p.k().max(truth.k());
    let mut table = vec![vec![0i64; k]; k];
    for (&a, &b) in p.labels.labels().iter().zip(truth.labels()) {
        table[a - 1][b - 1] += 1;
    }
    let best = if k <= EXHAUSTIVE_MAX_K {
        best_by_permutation(&table)
    } else {
        max_assignment(&table)
    };
    Ok(best as f64 / p.len() as f64)
}

fn best_by_permutation(table: &[Vec<i64>]) -> i64 {
    let k = table.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = i64::MIN;
    permute(&mut perm, 0, &mut |p| {
        let s = p.iter().enumerate().map(|(i, &j)| table[i][j]).sum::<i64>();
        best = best.max(s);
    });
    best
}

fn permute(v: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        visit(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, visit);
        v.swap(start, i);
    }
}

/// Hungarian method (potentials form) on the negated table, returning the
/// maximum total of a perfect matching in the square `table`.
fn max_assignment(table: &[Vec<i64>]) -> i64 {
    let n = table.len();
    let cost = |i: usize, j: usize| -table[i - 1][j - 1];
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| table[p[j] - 1][j - 1]).sum()
}
