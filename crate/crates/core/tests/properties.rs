use distmodes::clustering::{
    cut, evaluate_eq5, hcluster, inter_pd, intra_pd, pooled_inter_pd, pooled_intra_pd, Linkage, Partition,
};
use distmodes::dataset::{DataMatrix, LabelVector};
use distmodes::density::{dip_statistic, pareto_density};
use distmodes::distances::{
    compute_distance_matrix, extract_distance_feature, DistanceMatrix, FeatureSource, MetricId,
};
use distmodes::gmm::{bayes_boundaries, fit_gmm, EmConfig, GmmModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn bimodal(n: usize, gap: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|i| a.sample(&mut rng) + if i % 3 == 0 { gap } else { 0.0 })
        .collect()
}

fn model_strategy() -> impl Strategy<Value = GmmModel<f64>> {
    (2usize..=4)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(0.05f64..1.0, m),
                prop::collection::vec(-5.0f64..5.0, m),
                prop::collection::vec(0.1f64..2.0, m),
            )
        })
        .prop_map(|(w, mu, s)| {
            let total: f64 = w.iter().sum();
            GmmModel::new(w.iter().map(|x| x / total).collect(), mu, s).unwrap()
        })
}

fn points_strategy() -> impl Strategy<Value = DataMatrix<f64>> {
    (3usize..25, 1usize..4).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n)
            .prop_map(|rows| DataMatrix::from_rows(&rows).unwrap())
    })
}

fn labels_for(n: usize, raw: &[usize]) -> LabelVector {
    // ensure label 1 is used and labels are contiguous
    let mut map = std::collections::BTreeMap::new();
    let labels: Vec<usize> = raw
        .iter()
        .take(n)
        .map(|r| {
            let next = map.len() + 1;
            *map.entry(*r).or_insert(next)
        })
        .collect();
    LabelVector::new(labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_rows_sum_to_one(model in model_strategy(), xs in prop::collection::vec(-50.0f64..50.0, 1..50)) {
        for x in xs {
            let p = model.posterior(x);
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12, "sum {s} at {x}");
            prop_assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn boundaries_are_equal_posterior_points(model in model_strategy()) {
        let b = bayes_boundaries(&model).unwrap();
        for (bd, &(i, j)) in b.boundaries.iter().zip(&b.pairs) {
            let p = model.posterior(*bd);
            let share = p[i] / (p[i] + p[j]);
            prop_assert!((share - 0.5).abs() <= 1e-6, "share {share} at {bd}");
            prop_assert!(*bd > model.means()[i] && *bd < model.means()[j]);
        }
        prop_assert_eq!(b.boundaries.len() + b.missing.len(), model.components() - 1);
    }

    #[test]
    fn symmetric_pairs_split_at_the_midpoint(mu in -10.0f64..10.0, gap in 0.5f64..8.0, s in 0.2f64..3.0) {
        let m = GmmModel::new(vec![0.5, 0.5], vec![mu, mu + gap], vec![s, s]).unwrap();
        let b = bayes_boundaries(&m).unwrap();
        prop_assert!((b.boundaries[0] - (mu + gap / 2.0)).abs() <= 1e-9);
    }

    #[test]
    fn intra_and_inter_partition_the_distance_feature(m in points_strategy(), raw in prop::collection::vec(0usize..4, 25)) {
        let d = compute_distance_matrix(&m, MetricId::Euclidean).unwrap();
        let p = Partition::ingested(labels_for(m.rows(), &raw));
        let mut pooled = pooled_intra_pd(&d, &p).unwrap();
        pooled.extend(pooled_inter_pd(&d, &p).unwrap());
        let df = extract_distance_feature(&d, FeatureSource::Metric(MetricId::Euclidean));
        prop_assert_eq!(sorted(pooled), sorted(df.values().to_vec()));
        let mut count = 0;
        for a in 1..=p.k() {
            count += intra_pd(&d, &p, a).unwrap().len();
            for b in a + 1..=p.k() {
                count += inter_pd(&d, &p, a, b).unwrap().len();
            }
        }
        prop_assert_eq!(count, df.len());
    }

    #[test]
    fn pde_integrates_to_one(xs in prop::collection::vec(-100.0f64..100.0, 10..400)) {
        let est = pareto_density(&xs, 512).unwrap();
        prop_assert!((est.integral() - 1.0).abs() <= 0.01, "integral {}", est.integral());
        prop_assert!(est.densities.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn dip_lies_in_its_range(xs in prop::collection::vec(-5.0f64..5.0, 4..200)) {
        let dip = dip_statistic(&xs).unwrap();
        let n = xs.len() as f64;
        prop_assert!(dip >= 1.0 / (2.0 * n) - 1e-12 && dip <= 0.25 + 1e-12, "dip {dip}");
    }

    #[test]
    fn dip_is_location_scale_invariant(xs in prop::collection::vec(-5.0f64..5.0, 4..100), a in 0.1f64..10.0, c in -10.0f64..10.0) {
        let moved: Vec<f64> = xs.iter().map(|x| a * x + c).collect();
        prop_assert!((dip_statistic(&xs).unwrap() - dip_statistic(&moved).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn distance_matrices_are_symmetric(m in points_strategy()) {
        for metric in [MetricId::Euclidean, MetricId::Manhattan, MetricId::Chebyshev, MetricId::Canberra] {
            let d = compute_distance_matrix(&m, metric).unwrap();
            for i in 0..d.n() {
                prop_assert_eq!(d.get(i, i), 0.0);
                for j in 0..d.n() {
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                    prop_assert!(d.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn eq5_is_scale_equivariant(m in points_strategy(), raw in prop::collection::vec(0usize..3, 25), bd in 0.5f64..20.0, a in prop::sample::select(vec![0.5f64, 2.0, 4.0, 0.25])) {
        let d = compute_distance_matrix(&m, MetricId::Euclidean).unwrap();
        let p = Partition::ingested(labels_for(m.rows(), &raw));
        let r1 = evaluate_eq5(&d, &p, bd).unwrap();
        let r2 = evaluate_eq5(&d.scaled(a), &p, bd * a).unwrap();
        prop_assert_eq!(r1.i_pct, r2.i_pct);
        let f1: Vec<_> = r1.clusters.iter().map(|c| c.pass).collect();
        let f2: Vec<_> = r2.clusters.iter().map(|c| c.pass).collect();
        prop_assert_eq!(f1, f2);
    }

    #[test]
    fn cuts_give_the_requested_cluster_count(m in points_strategy(), k in 1usize..4) {
        let d = compute_distance_matrix(&m, MetricId::Euclidean).unwrap();
        let k = k.min(d.n());
        for linkage in Linkage::ALL {
            let dend = hcluster(&d, linkage);
            prop_assert_eq!(cut(&dend, k).unwrap().k(), k);
            if linkage.is_monotone() {
                prop_assert!(dend.inversions.is_empty());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn em_loglik_never_decreases(seed in 0u64..10_000, gap in 0.0f64..6.0, m in 1usize..4) {
        let data = bimodal(300, gap, seed);
        let fit = fit_gmm(&data, m, &EmConfig { seed, restarts: 2, ..EmConfig::default() }).unwrap();
        for run in &fit.runs {
            for w in run.trace.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-10 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn fit_and_boundaries_are_affine_equivariant(seed in 0u64..1000, a in 0.5f64..5.0, c in -10.0f64..10.0) {
        let data = bimodal(400, 5.0, seed);
        let moved: Vec<f64> = data.iter().map(|x| a * x + c).collect();
        let cfg = EmConfig { seed, ..EmConfig::default() };
        let f1 = fit_gmm(&data, 2, &cfg).unwrap().model;
        let f2 = fit_gmm(&moved, 2, &cfg).unwrap().model;
        for i in 0..2 {
            prop_assert!((f2.means()[i] - (a * f1.means()[i] + c)).abs() <= 1e-6);
            prop_assert!((f2.sds()[i] - a * f1.sds()[i]).abs() <= 1e-6);
            prop_assert!((f2.weights()[i] - f1.weights()[i]).abs() <= 1e-6);
        }
        let b1 = bayes_boundaries(&f1).unwrap().boundaries;
        let b2 = bayes_boundaries(&f2).unwrap().boundaries;
        prop_assert_eq!(b1.len(), b2.len());
        for (x, y) in b1.iter().zip(&b2) {
            prop_assert!((y - (a * x + c)).abs() <= 1e-6);
        }
    }
}

#[test]
fn distance_matrix_round_trips_through_feature() {
    let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, (i * i) as f64]).collect();
    let d = compute_distance_matrix(&DataMatrix::from_rows(&rows).unwrap(), MetricId::Euclidean).unwrap();
    let df = extract_distance_feature(&d, FeatureSource::Metric(MetricId::Euclidean));
    let back: DistanceMatrix<f64> = df.to_matrix().unwrap();
    assert_eq!(back, d);
}
