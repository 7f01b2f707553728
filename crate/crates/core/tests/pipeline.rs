use proptest::prelude::*;
use shadowgb::data::normalize_min_max;
use shadowgb::evaluation::{theta_grid_search, ClassifierKind};
use shadowgb::synth::Synthetic;
use shadowgb::{run_experiment, ClassifierConfig, Dataset, Outcome, RunConfig, ShadowClassifier};

fn moons(n: usize, seed: u64) -> Dataset {
    Synthetic::Moons.generate(n, 0.15, seed).unwrap()
}

fn config(kind: ClassifierKind, noise_rate: f64) -> RunConfig {
    RunConfig {
        classifier: kind,
        noise_rate,
        fold_count: 4,
        seed: 11,
        ..RunConfig::default()
    }
}

#[test]
fn experiments_reproduce_apart_from_timings() {
    let ds = moons(240, 1);
    let cfg = config(ClassifierKind::Shadow3wc, 0.2);
    let a = run_experiment(&ds, &cfg).unwrap().without_timings();
    let b = run_experiment(&ds, &cfg).unwrap().without_timings();
    assert_eq!(a, b);
}

#[test]
fn parallel_folds_match_serial_folds() {
    let ds = moons(240, 2);
    let serial = config(ClassifierKind::Shadow3wc, 0.1);
    let parallel = RunConfig { jobs: 3, ..serial };
    let a = run_experiment(&ds, &serial).unwrap().without_timings();
    let b = run_experiment(&ds, &parallel).unwrap().without_timings();
    assert_eq!(a.per_fold, b.per_fold);
    assert_eq!(a.aggregate, b.aggregate);
}

#[test]
fn both_classifiers_see_identical_folds() {
    let ds = moons(200, 3);
    let shadow = run_experiment(&ds, &config(ClassifierKind::Shadow3wc, 0.3)).unwrap();
    let knn = run_experiment(&ds, &config(ClassifierKind::Gbknn, 0.3)).unwrap();
    for (s, k) in shadow.per_fold.iter().zip(&knn.per_fold) {
        assert_eq!(s.metrics.n, k.metrics.n);
        assert_eq!(s.ball_count, k.ball_count);
    }
    // the nearest-ball rule never defers
    assert_eq!(knn.aggregate.ur, 0.0);
    assert_eq!(shadow.dataset_size, 200);
}

#[test]
fn theta_search_reports_one_row_per_distinct_theta() {
    let ds = moons(160, 4);
    let search = theta_grid_search(
        &ds,
        &[0.3, 0.5, 0.3, 0.7],
        &config(ClassifierKind::Shadow3wc, 0.1),
    )
    .unwrap();
    let thetas: Vec<f64> = search.rows.iter().map(|r| r.theta).collect();
    assert_eq!(thetas, vec![0.3, 0.5, 0.7]);
    let best = search.best();
    assert!(search
        .rows
        .iter()
        .all(|r| r.aggregate.f1 <= best.aggregate.f1));
}

#[test]
fn saved_model_predicts_like_the_original() {
    let ds = normalize_min_max(&moons(300, 5));
    let clf = ShadowClassifier::fit(&ds, &ClassifierConfig::default()).unwrap();
    let back = ShadowClassifier::from_json(&clf.to_json().unwrap()).unwrap();
    assert_eq!(back, clf);
    for row in ds.rows() {
        assert_eq!(back.predict(row).unwrap(), clf.predict(row).unwrap());
    }
}

#[test]
fn rejects_truncated_and_mismatched_models() {
    let ds = normalize_min_max(&moons(100, 6));
    let clf = ShadowClassifier::fit(&ds, &ClassifierConfig::default()).unwrap();
    let json = clf.to_json().unwrap();
    assert!(ShadowClassifier::from_json(&json[..json.len() / 2]).is_err());
    assert!(clf.predict(&[0.1, 0.2, 0.3]).unwrap_err().is_config());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classify_agrees_with_predict(
        seed in 0u64..1000,
        kind in 0usize..4,
        queries in prop::collection::vec((-0.2..1.2f64, -0.2..1.2f64), 1..40),
    ) {
        let gen = [
            Synthetic::Moons,
            Synthetic::Rings,
            Synthetic::Checkerboard,
            Synthetic::Blobs { dim: 2, classes: 4 },
        ][kind];
        let ds = normalize_min_max(&gen.generate(150, 0.2, seed).unwrap());
        let clf = ShadowClassifier::fit(&ds, &ClassifierConfig::default()).unwrap();
        for (x, y) in queries {
            let q = [x, y];
            prop_assert_eq!(clf.classify(&q).unwrap(), clf.predict(&q).unwrap().outcome);
        }
        for row in ds.rows() {
            prop_assert_eq!(clf.classify(row).unwrap(), clf.predict(row).unwrap().outcome);
        }
    }

    #[test]
    fn committed_predictions_use_known_labels(seed in 0u64..1000) {
        let ds = normalize_min_max(&moons(120, seed));
        let clf = ShadowClassifier::fit(&ds, &ClassifierConfig::default()).unwrap();
        for row in ds.rows() {
            if let Outcome::Certain(l) = clf.classify(row).unwrap() {
                prop_assert!(l < ds.class_count());
            }
        }
    }
}
