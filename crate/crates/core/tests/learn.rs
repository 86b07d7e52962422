use hifdiff::learn::grid::search_points;
use hifdiff::learn::{
    cross_validate, fit, grid_search, Criterion, Dataset, Distance, FittedState, HyperGrid, Hyperparameters,
    KernelKind, Matrix, TrainedModel,
};
use hifdiff::{ClassLabel, Error, FeatureVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn label(b: bool) -> ClassLabel {
    if b {
        ClassLabel::Internal
    } else {
        ClassLabel::External
    }
}

fn dataset(rows: Vec<Vec<f64>>, y: &[bool]) -> Dataset {
    let d = rows[0].len();
    Dataset::new(
        (0..rows.len() as u64).collect(),
        Matrix::from_rows(&rows).unwrap(),
        y.iter().map(|&b| label(b)).collect(),
        (0..d).map(|j| format!("f{j}")).collect(),
    )
    .unwrap()
}

/// Two unit-variance Gaussian blobs centred at +m and -m in every coordinate.
fn blobs(n: usize, d: usize, m: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let pos = i % 2 == 0;
        let c = if pos { m } else { -m };
        rows.push(
            (0..d)
                .map(|_| c + Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect(),
        );
        y.push(pos);
    }
    (rows, y)
}

fn noisy(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|r| r[0] + 0.7 * r[1] * r[1] - r[2] + 0.3 * rng.gen_range(-1.0..1.0) > 0.5)
        .collect();
    (rows, y)
}

fn accuracy(model: &TrainedModel, rows: &[Vec<f64>], y: &[bool]) -> f64 {
    let hits = rows
        .iter()
        .zip(y)
        .filter(|(r, &t)| model.predict_row(r).unwrap().is_positive() == t)
        .count();
    hits as f64 / rows.len() as f64
}

#[test]
fn one_nearest_neighbour_memorizes_training_set() {
    let (rows, y) = noisy(150, 1);
    let data = dataset(rows.clone(), &y);
    for distance in [Distance::Manhattan, Distance::Euclidean] {
        let hp = Hyperparameters::Knn {
            leaf_size: 3,
            neighbors: 1,
            distance,
        };
        let m = fit(&hp, &data, 0).unwrap();
        assert_eq!(accuracy(&m, &rows, &y), 1.0);
    }
}

#[test]
fn separable_feature_gives_depth_one_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<f64>> = (0..80)
        .map(|i| vec![rng.gen_range(-1.0..1.0), if i % 2 == 0 { 1.0 + rng.gen::<f64>() } else { -rng.gen::<f64>() }])
        .collect();
    let y: Vec<bool> = (0..80).map(|i| i % 2 == 0).collect();
    let data = dataset(rows.clone(), &y);
    for criterion in [Criterion::Entropy, Criterion::Gini] {
        let m = fit(&Hyperparameters::DecisionTree { criterion }, &data, 0).unwrap();
        let FittedState::DecisionTree(t) = &m.state else { panic!() };
        assert_eq!(t.depth(), 1);
        assert_eq!(accuracy(&m, &rows, &y), 1.0);
    }
}

#[test]
fn naive_bayes_matches_bayes_optimal_rule_on_blobs() {
    let (train, ty) = blobs(400, 3, 3.0, 10);
    let (test, sy) = blobs(1000, 3, 3.0, 11);
    let m = fit(&Hyperparameters::NaiveBayes, &dataset(train, &ty), 0).unwrap();
    // equal priors and covariances: the optimal rule is the sign of the coordinate sum
    let bayes: Vec<bool> = test.iter().map(|r| r.iter().sum::<f64>() > 0.0).collect();
    let bayes_acc = bayes.iter().zip(&sy).filter(|(a, b)| a == b).count() as f64 / 1000.0;
    let nb_acc = accuracy(&m, &test, &sy);
    assert!(nb_acc > 0.99, "{nb_acc}");
    assert!(nb_acc >= bayes_acc - 0.005, "{nb_acc} vs {bayes_acc}");
}

fn hand_rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for k in 0..a.len() {
        d2 += (a[k] - b[k]).powi(2);
    }
    (-gamma * d2).exp()
}

#[test]
fn svm_decision_matches_kernel_sum_oracle() {
    let (rows, y) = noisy(20, 7);
    let data = dataset(rows.clone(), &y);
    let gamma = 0.5;
    let hp = Hyperparameters::Svm {
        c: 10.0,
        gamma,
        kernel: KernelKind::Rbf,
    };
    let m = fit(&hp, &data, 0).unwrap();
    let FittedState::Svm(svm) = &m.state else { panic!() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let z: Vec<f64> = (0..4).map(|j| (x[j] - m.standardizer.mean[j]) / m.standardizer.scale[j]).collect();
        let mut oracle = svm.intercept;
        for i in 0..svm.support_vectors.rows() {
            oracle += svm.dual_coef[i] * hand_rbf(svm.support_vectors.row(i), &z, gamma);
        }
        let got = m.score_row(&x).unwrap();
        assert!((got - oracle).abs() <= 1e-6 * oracle.abs().max(1.0), "{got} vs {oracle}");
        assert_eq!(m.predict_row(&x).unwrap().is_positive(), oracle > 0.0);
    }
}

fn scaled(rows: &[Vec<f64>], col: usize, k: f64) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let mut r = r.clone();
            r[col] *= k;
            r
        })
        .collect()
}

#[test]
fn positive_column_scaling_leaves_predictions_unchanged() {
    let (rows, y) = noisy(120, 2);
    let (probe, _) = noisy(200, 3);
    let points = [
        Hyperparameters::Knn {
            leaf_size: 3,
            neighbors: 5,
            distance: Distance::Euclidean,
        },
        Hyperparameters::Knn {
            leaf_size: 3,
            neighbors: 4,
            distance: Distance::Manhattan,
        },
        Hyperparameters::DecisionTree {
            criterion: Criterion::Entropy,
        },
        Hyperparameters::RandomForest {
            max_depth: 6,
            max_features: 0.5,
            min_samples_leaf: 2,
            estimators: 30,
        },
        Hyperparameters::GradientBoost {
            learning_rate: 0.1,
            max_depth: 3,
            estimators: 30,
            subsample: 0.5,
        },
    ];
    for k in [4.0, 0.125, 1000.0] {
        let base = dataset(rows.clone(), &y);
        let other = dataset(scaled(&rows, 1, k), &y);
        let probe_scaled = scaled(&probe, 1, k);
        for hp in &points {
            let a = fit(hp, &base, 5).unwrap();
            let b = fit(hp, &other, 5).unwrap();
            for (p, q) in probe.iter().zip(&probe_scaled) {
                assert_eq!(a.predict_row(p).unwrap(), b.predict_row(q).unwrap(), "{hp:?} k={k}");
            }
        }
    }
}

#[test]
fn single_point_grid_returns_it_with_its_cv_score() {
    let (rows, y) = noisy(90, 5);
    let data = dataset(rows, &y);
    let hp = Hyperparameters::DecisionTree {
        criterion: Criterion::Gini,
    };
    let r = search_points(std::slice::from_ref(&hp), &data, 5, 9).unwrap();
    assert_eq!(r.best, hp);
    assert_eq!(r.score, cross_validate(&hp, &data, 5, 9).unwrap().score);
}

#[test]
fn dominated_duplicate_never_changes_the_winner() {
    let (rows, y) = noisy(90, 6);
    let data = dataset(rows, &y);
    let grid = HyperGrid::default();
    let base = grid.points(hifdiff::learn::ClassifierKind::Knn);
    let r = search_points(&base, &data, 3, 1).unwrap();
    let loser = r
        .evaluated
        .iter()
        .find(|(_, s)| *s < r.score)
        .map(|(p, _)| p.clone())
        .expect("some point scores below the winner");
    let mut extended = base.clone();
    extended.push(loser.clone());
    extended.insert(0, loser);
    let r2 = search_points(&extended, &data, 3, 1).unwrap();
    assert_eq!(r2.best, r.best);
    assert_eq!(r2.score, r.score);
}

#[test]
fn decision_tree_grid_picks_the_higher_scoring_criterion() {
    let (rows, y) = noisy(100, 8);
    let data = dataset(rows, &y);
    let r = grid_search(hifdiff::learn::ClassifierKind::DecisionTree, &HyperGrid::default(), &data, 4, 2).unwrap();
    let max = r.evaluated.iter().map(|(_, s)| *s).fold(f64::MIN, f64::max);
    assert_eq!(r.score, max);
    let first_max = r.evaluated.iter().find(|(_, s)| *s == max).unwrap();
    assert_eq!(first_max.0, r.best);
}

#[test]
fn cross_validation_visits_every_sample_once() {
    let (rows, y) = noisy(47, 9);
    let data = dataset(rows, &y);
    let cv = cross_validate(&Hyperparameters::NaiveBayes, &data, 5, 3).unwrap();
    let total: u64 = cv.per_fold.iter().map(|c| c.tp + c.fn_ + c.tn + c.fp).sum();
    assert_eq!(total, 47);
    assert_eq!(cv.fold_of.len(), 47);
    assert_eq!(cv.counts.positives() as usize, y.iter().filter(|&&b| b).count());
}

#[test]
fn fitting_is_deterministic_and_models_round_trip() {
    let (rows, y) = noisy(80, 12);
    let data = dataset(rows.clone(), &y);
    for kind in hifdiff::learn::ClassifierKind::ALL {
        let hp = HyperGrid::default().points(kind).swap_remove(0);
        let hp = match hp {
            Hyperparameters::RandomForest { .. } | Hyperparameters::GradientBoost { .. } => match hp {
                Hyperparameters::RandomForest {
                    max_depth,
                    max_features,
                    min_samples_leaf,
                    ..
                } => Hyperparameters::RandomForest {
                    max_depth,
                    max_features,
                    min_samples_leaf,
                    estimators: 20,
                },
                Hyperparameters::GradientBoost {
                    learning_rate,
                    max_depth,
                    subsample,
                    ..
                } => Hyperparameters::GradientBoost {
                    learning_rate,
                    max_depth,
                    estimators: 20,
                    subsample,
                },
                _ => unreachable!(),
            },
            other => other,
        };
        let a = fit(&hp, &data, 77).unwrap();
        let b = fit(&hp, &data, 77).unwrap();
        assert_eq!(a, b, "{kind}");
        let back = TrainedModel::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a, "{kind}");
        for r in &rows {
            assert_eq!(back.predict_row(r).unwrap(), a.predict_row(r).unwrap());
        }
    }
}

#[test]
fn predict_by_name_and_schema_mismatch() {
    let (rows, y) = noisy(40, 13);
    let data = dataset(rows.clone(), &y);
    let m = fit(&Hyperparameters::NaiveBayes, &data, 0).unwrap();
    let names: std::sync::Arc<[String]> = vec!["junk".to_string(), "f3".into(), "f2".into(), "f1".into(), "f0".into()].into();
    let fv = FeatureVector {
        spec_id: 0,
        names: names.clone(),
        values: vec![9.0, rows[0][3], rows[0][2], rows[0][1], rows[0][0]],
        label: None,
    };
    assert_eq!(m.predict(&fv).unwrap(), m.predict_row(&rows[0]).unwrap());
    let missing = FeatureVector {
        spec_id: 0,
        names: vec!["f0".to_string()].into(),
        values: vec![1.0],
        label: None,
    };
    assert!(matches!(m.predict(&missing), Err(Error::InvalidInput(_))));
    assert!(matches!(m.predict_row(&[1.0]), Err(Error::InvalidInput(_))));
}

#[test]
fn invalid_training_sets_are_rejected() {
    let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]];
    let one_class = dataset(rows.clone(), &[true, true, true]);
    for kind in hifdiff::learn::ClassifierKind::ALL {
        let hp = HyperGrid::default().points(kind).swap_remove(0);
        assert!(matches!(fit(&hp, &one_class, 0), Err(Error::InvalidData(_))), "{kind}");
    }
    let mut bad = rows;
    bad[1][0] = f64::NAN;
    let nonfinite = dataset(bad, &[true, false, true]);
    assert!(matches!(
        fit(&Hyperparameters::NaiveBayes, &nonfinite, 0),
        Err(Error::InvalidData(_))
    ));
}

#[test]
fn grid_files_parse() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let full = HyperGrid::load(&root.join("full_grid.toml")).unwrap();
    assert_eq!(full.points(hifdiff::learn::ClassifierKind::Svm).len(), 50);
    assert_eq!(full.points(hifdiff::learn::ClassifierKind::NaiveBayes).len(), 1);
    let capped = HyperGrid {
        estimator_cap: 1000,
        ..full
    };
    let rf = capped.points(hifdiff::learn::ClassifierKind::RandomForest);
    assert_eq!(rf.len(), 4 * 3 * 3 * 2);
    assert!(rf.iter().all(|p| matches!(p, Hyperparameters::RandomForest { estimators, .. } if *estimators <= 1000)));
}
