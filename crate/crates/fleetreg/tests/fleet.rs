//! End-to-end behavior of the fleet orchestration: degeneracy to the global
//! model at k=1, locality of per-cluster randomness, and the directional
//! claim that a partitioned fit beats a pooled fit on mixed-regime data.

mod common;

use fleetreg::fbr::{cross_validate, train_fbr, train_global, Mode, Partition};
use fleetreg::regressors::RegressorSpec;
use fleetreg::synthgen::{generate, GeneratorConfig};
use fleetreg::tabular::Dataset;

#[test]
fn single_cluster_fleet_equals_global_on_100_random_queries() {
    let data = generate(&GeneratorConfig::canonical()).unwrap().data;
    let mut rng = common::Lcg(0xABCD);
    let queries: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..data.k()).map(|_| rng.range(-30.0, 30.0)).collect())
        .collect();
    for spec in [
        RegressorSpec::ridge(),
        RegressorSpec::knn(),
        RegressorSpec::random_forest(),
        RegressorSpec::mlp(),
    ] {
        let global = train_global(&data, &spec, 4).unwrap();
        let fleet = train_fbr(&data, &spec, Partition::Kmeans { k: 1 }, 4).unwrap();
        for q in &queries {
            let g = global.predict(q).unwrap();
            let (f, cluster) = fleet.predict(q).unwrap();
            assert_eq!(cluster, 0);
            assert!(
                (g - f).abs() <= 1e-9,
                "{}: global {g} vs k=1 fleet {f}",
                spec.label()
            );
        }
    }
}

/// Six rows per cluster with x drawn from {-1, +1} only: every union of
/// clusters has feature mean 0 and population std 1, so deleting one cluster
/// leaves the standardization of the others untouched and model equality
/// isolates the seed scheme.
fn three_balanced_clusters() -> Dataset {
    let mut features = Vec::new();
    let mut target = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3usize {
        for i in 0..6 {
            let x = if i < 3 { -1.0 } else { 1.0 };
            features.push(vec![x]);
            target.push(c as f64 * 10.0 + 0.5 * x + i as f64 * 0.01);
            labels.push(c * 4); // label values 0, 4, 8
        }
    }
    Dataset::new(features, target, vec!["x".into()], Some(labels)).unwrap()
}

#[test]
fn deleting_one_labeled_cluster_leaves_the_others_bit_identical() {
    let spec = RegressorSpec::random_forest(); // seed-sensitive on purpose
    let full = three_balanced_clusters();
    let fleet_full = train_fbr(&full, &spec, Partition::ProvidedLabels, 99).unwrap();

    // drop the middle cluster (label value 4)
    let keep: Vec<usize> = (0..full.n())
        .filter(|&i| full.cluster_labels.as_ref().unwrap()[i] != 4)
        .collect();
    let trimmed = full.subset(&keep);
    let fleet_trimmed = train_fbr(&trimmed, &spec, Partition::ProvidedLabels, 99).unwrap();

    assert_eq!(fleet_full.local_models.len(), 3);
    assert_eq!(fleet_trimmed.local_models.len(), 2);
    // label 0 keeps position 0; label 8 moves from position 2 to 1
    assert_eq!(fleet_full.local_models[0], fleet_trimmed.local_models[0]);
    assert_eq!(fleet_full.local_models[2], fleet_trimmed.local_models[1]);
}

#[test]
fn relabeling_changes_seeds_but_not_membership() {
    // same rows, same grouping, different label values: the per-cluster
    // forest draws differ because seeds key on the label value
    let a = three_balanced_clusters();
    let mut relabeled = a.clone();
    relabeled.cluster_labels =
        Some(a.cluster_labels.as_ref().unwrap().iter().map(|&l| l + 100).collect());
    let spec = RegressorSpec::random_forest();
    let fa = train_fbr(&a, &spec, Partition::ProvidedLabels, 99).unwrap();
    let fb = train_fbr(&relabeled, &spec, Partition::ProvidedLabels, 99).unwrap();
    assert_eq!(fa.local_models.len(), fb.local_models.len());
    assert_ne!(fa.local_models[0], fb.local_models[0]);
}

#[test]
fn fleet_beats_global_on_mixed_regime_data() {
    let cfg = GeneratorConfig::canonical();
    let data = generate(&cfg).unwrap().data;
    for spec in [
        RegressorSpec::ridge(),
        RegressorSpec::knn(),
        RegressorSpec::random_forest(),
    ] {
        let g = cross_validate(&data, &spec, &Mode::Global, 4, cfg.seed).unwrap();
        let f = cross_validate(&data, &spec, &Mode::FbrKmeans { k: 5 }, 4, cfg.seed).unwrap();
        assert!(
            f.report.mae.mean < g.report.mae.mean,
            "{}: fleet {} should beat global {}",
            spec.label(),
            f.report.mae.mean,
            g.report.mae.mean
        );
    }
}

#[test]
fn needless_partitioning_of_homogeneous_data_stays_benign() {
    // one sub-population only; forcing k = 5 must not blow up
    let mut cfg = GeneratorConfig::canonical();
    cfg.m_clusters = 1;
    cfg.centers = Some(vec![0.0]);
    let data = generate(&cfg).unwrap().data;
    let spec = RegressorSpec::ridge();
    let g = cross_validate(&data, &spec, &Mode::Global, 4, cfg.seed).unwrap();
    let f = cross_validate(&data, &spec, &Mode::FbrKmeans { k: 5 }, 4, cfg.seed).unwrap();
    assert!(
        f.report.mae.mean <= 1.5 * g.report.mae.mean,
        "needless split cost too much: fleet {} vs global {}",
        f.report.mae.mean,
        g.report.mae.mean
    );
}

#[test]
fn label_routing_and_kmeans_routing_agree_on_separated_data() {
    let data = generate(&GeneratorConfig::canonical()).unwrap().data;
    let spec = RegressorSpec::ridge();
    let by_labels = train_fbr(&data, &spec, Partition::ProvidedLabels, 6).unwrap();
    let by_kmeans = train_fbr(&data, &spec, Partition::Kmeans { k: 5 }, 6).unwrap();
    // both routers must agree on which rows belong together
    let la: Vec<usize> =
        data.features.iter().map(|r| by_labels.predict(r).unwrap().1).collect();
    let ka: Vec<usize> =
        data.features.iter().map(|r| by_kmeans.predict(r).unwrap().1).collect();
    assert_eq!(common::ari(&la, &ka), 1.0);
}

#[test]
fn cross_validation_seeds_folds_independently() {
    let data = generate(&GeneratorConfig::canonical()).unwrap().data;
    let spec = RegressorSpec::ridge();
    let a = cross_validate(&data, &spec, &Mode::Global, 4, 1).unwrap();
    let b = cross_validate(&data, &spec, &Mode::Global, 4, 1).unwrap();
    let c = cross_validate(&data, &spec, &Mode::Global, 4, 2).unwrap();
    assert_eq!(a.report, b.report);
    assert_ne!(a.report, c.report);
}
