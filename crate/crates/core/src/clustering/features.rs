use super::partition::Partition;
use crate::distances::{DistanceFeature, DistanceMatrix, FeatureSource};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distances between members of one cluster (`l < j`, row-major). Empty for
/// a singleton.
pub fn intra_pd<T: Scalar>(d: &DistanceMatrix<T>, p: &Partition, cluster: usize) -> Result<DistanceFeature<T>> {
    p.check_size(d.n())?;
    p.check_cluster(cluster)?;
    let members: Vec<usize> = member_list(p, cluster);
    let mut values = Vec::with_capacity(members.len() * members.len().saturating_sub(1) / 2);
    let mut pairs = Vec::with_capacity(values.capacity());
    for (a, &l) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            values.push(d.get(l, j));
            pairs.push((l, j));
        }
    }
    Ok(DistanceFeature::with_pairs(values, pairs, FeatureSource::Ingested))
}

/// Distances from members of cluster `a` to members of cluster `b`.
pub fn inter_pd<T: Scalar>(d: &DistanceMatrix<T>, p: &Partition, a: usize, b: usize) -> Result<DistanceFeature<T>> {
    p.check_size(d.n())?;
    p.check_cluster(a)?;
    p.check_cluster(b)?;
    if a == b {
        return Err(Error::InvalidArgument("inter_pd needs two different clusters".into()));
    }
    let (ma, mb) = (member_list(p, a), member_list(p, b));
    let mut values = Vec::with_capacity(ma.len() * mb.len());
    let mut pairs = Vec::with_capacity(values.capacity());
    for &l in &ma {
        for &j in &mb {
            values.push(d.get(l, j));
            pairs.push((l, j));
        }
    }
    Ok(DistanceFeature::with_pairs(values, pairs, FeatureSource::Ingested))
}

/// All intra-partition distances pooled over clusters.
pub fn pooled_intra_pd<T: Scalar>(d: &DistanceMatrix<T>, p: &Partition) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for c in 1..=p.k() {
        out.extend_from_slice(intra_pd(d, p, c)?.values());
    }
    Ok(out)
}

/// All inter-partition distances pooled over cluster pairs.
pub fn pooled_inter_pd<T: Scalar>(d: &DistanceMatrix<T>, p: &Partition) -> Result<Vec<T>> {
    p.check_size(d.n())?;
    let labels = p.labels.labels();
    let n = d.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if labels[i] != labels[j] {
                out.push(d.get(i, j));
            }
        }
    }
    Ok(out)
}

fn member_list(p: &Partition, cluster: usize) -> Vec<usize> {
    p.labels
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == cluster)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DataMatrix, LabelVector};
    use crate::distances::{compute_distance_matrix, extract_distance_feature, MetricId};

    fn setup() -> (DistanceMatrix<f64>, Partition) {
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 3.0, 10.0, 12.0].iter().map(|v| vec![*v]).collect();
        let d = compute_distance_matrix(&DataMatrix::from_rows(&rows).unwrap(), MetricId::Euclidean).unwrap();
        let p = Partition::ingested(LabelVector::new(vec![1, 1, 1, 2, 3]).unwrap());
        (d, p)
    }

    #[test]
    fn intra_and_inter_values() {
        let (d, p) = setup();
        assert_eq!(intra_pd(&d, &p, 1).unwrap().values(), &[1.0, 3.0, 2.0]);
        assert!(intra_pd(&d, &p, 2).unwrap().is_empty());
        assert_eq!(inter_pd(&d, &p, 2, 3).unwrap().values(), &[2.0]);
        assert_eq!(inter_pd(&d, &p, 1, 2).unwrap().values(), &[10.0, 9.0, 7.0]);
        assert!(inter_pd(&d, &p, 1, 1).is_err());
        assert!(intra_pd(&d, &p, 4).is_err());
    }

    #[test]
    fn whole_dataset_cluster_is_df() {
        let (d, _) = setup();
        let all = Partition::ingested(LabelVector::new(vec![1; 5]).unwrap());
        let df = extract_distance_feature(&d, FeatureSource::Metric(MetricId::Euclidean));
        assert_eq!(intra_pd(&d, &all, 1).unwrap().values(), df.values());
    }

    #[test]
    fn pooled_sizes_add_up() {
        let (d, p) = setup();
        let intra = pooled_intra_pd(&d, &p).unwrap();
        let inter = pooled_inter_pd(&d, &p).unwrap();
        assert_eq!(intra.len() + inter.len(), 10);
    }
}
