//! The seven binary classifiers, stratified cross-validation and grid search.
//! Every learner sees z-scored features; the standardizer is part of the model.

pub mod bayes;
pub mod boost;
pub mod cv;
pub mod data;
pub mod forest;
pub mod grid;
pub mod knn;
pub mod mlp;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scenario::ClassLabel;

pub use bayes::GaussianNb;
pub use boost::GradientBoost;
pub use cv::{cross_validate, stratified_folds, CvResult};
pub use data::{Dataset, Matrix, Standardizer};
pub use forest::RandomForest;
pub use grid::{grid_search, GridResult, HyperGrid};
pub use knn::{Distance, Knn};
pub use mlp::{Activation, Mlp};
pub use svm::{Kernel, Svm};
pub use tree::{Criterion, Tree};

pub const MODEL_SCHEMA: &str = "hifdiff.model.v1";

/// Convergence settings shared by every MLP fit.
pub const MLP_TOLERANCE: f64 = 1e-4;
pub const MLP_MAX_ITER: usize = 500;
/// Maximal KKT violation accepted by the SVM solver.
pub const SVM_TOLERANCE: f64 = 1e-3;
pub const POLY_DEGREE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    GradientBoost,
    Mlp,
    NaiveBayes,
    Knn,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 7] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::GradientBoost,
        ClassifierKind::Mlp,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Knn,
        ClassifierKind::Svm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::GradientBoost => "gradient_boost",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Svm => "svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classifier kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
    Poly,
}

/// One point of a classifier's hyperparameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparameters {
    DecisionTree {
        criterion: Criterion,
    },
    RandomForest {
        max_depth: usize,
        max_features: f64,
        min_samples_leaf: usize,
        estimators: usize,
    },
    GradientBoost {
        learning_rate: f64,
        max_depth: usize,
        estimators: usize,
        subsample: f64,
    },
    Mlp {
        activation: Activation,
        alpha: f64,
        hidden_layer: (usize, usize),
        solver: String,
    },
    NaiveBayes,
    Knn {
        leaf_size: usize,
        neighbors: usize,
        distance: Distance,
    },
    Svm {
        #[serde(rename = "C")]
        c: f64,
        gamma: f64,
        kernel: KernelKind,
    },
}

impl Hyperparameters {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparameters::DecisionTree { .. } => ClassifierKind::DecisionTree,
            Hyperparameters::RandomForest { .. } => ClassifierKind::RandomForest,
            Hyperparameters::GradientBoost { .. } => ClassifierKind::GradientBoost,
            Hyperparameters::Mlp { .. } => ClassifierKind::Mlp,
            Hyperparameters::NaiveBayes => ClassifierKind::NaiveBayes,
            Hyperparameters::Knn { .. } => ClassifierKind::Knn,
            Hyperparameters::Svm { .. } => ClassifierKind::Svm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.kind())));
        match *self {
            Hyperparameters::RandomForest {
                max_depth,
                max_features,
                min_samples_leaf,
                estimators,
            } => {
                if max_depth == 0 || min_samples_leaf == 0 || estimators == 0 {
                    return bad("max_depth, min_samples_leaf and estimators must be positive");
                }
                if !(max_features > 0.0 && max_features <= 1.0) {
                    return bad("max_features must lie in (0, 1]");
                }
            }
            Hyperparameters::GradientBoost {
                learning_rate,
                max_depth,
                estimators,
                subsample,
            } => {
                if max_depth == 0 || estimators == 0 || !(learning_rate > 0.0) {
                    return bad("learning_rate, max_depth and estimators must be positive");
                }
                if !(subsample > 0.0 && subsample <= 1.0) {
                    return bad("subsample must lie in (0, 1]");
                }
            }
            Hyperparameters::Mlp {
                alpha,
                hidden_layer,
                ref solver,
                ..
            } => {
                if !(alpha >= 0.0) || hidden_layer.0 == 0 || hidden_layer.1 == 0 {
                    return bad("alpha must be >= 0 and hidden layers non-empty");
                }
                // only the quasi-Newton solver is implemented
                if solver != "lbfgs" {
                    return bad("mlp solver must be \"lbfgs\"");
                }
            }
            Hyperparameters::Knn { neighbors, leaf_size, .. } => {
                if neighbors == 0 || leaf_size == 0 {
                    return bad("neighbors and leaf_size must be positive");
                }
            }
            Hyperparameters::Svm { c, gamma, .. } => {
                if !(c > 0.0 && gamma > 0.0) {
                    return bad("C and gamma must be positive");
                }
            }
            Hyperparameters::DecisionTree { .. } | Hyperparameters::NaiveBayes => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "state", rename_all = "snake_case")]
pub enum FittedState {
    DecisionTree(Tree),
    RandomForest(RandomForest),
    GradientBoost(GradientBoost),
    Mlp(Mlp),
    NaiveBayes(GaussianNb),
    Knn(Knn),
    Svm(Svm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: String,
    pub kind: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    pub selected_features: Vec<String>,
    pub standardizer: Standardizer,
    pub state: FittedState,
    pub train_seed: u64,
}

/// Fits `hp` on `data` (raw, unstandardized features).
pub fn fit(hp: &Hyperparameters, data: &Dataset, seed: u64) -> Result<TrainedModel> {
    hp.validate()?;
    data.check_trainable()?;
    let standardizer = Standardizer::fit(&data.x);
    let x = standardizer.transform(&data.x);
    let y = data.positive_mask();
    let state = match hp {
        Hyperparameters::DecisionTree { criterion } => {
            let idx: Vec<usize> = (0..x.rows()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            FittedState::DecisionTree(Tree::fit_classifier(
                &x,
                &y,
                &idx,
                *criterion,
                tree::TreeParams::default(),
                &mut rng,
            ))
        }
        Hyperparameters::RandomForest {
            max_depth,
            max_features,
            min_samples_leaf,
            estimators,
        } => FittedState::RandomForest(RandomForest::fit(
            &x,
            &y,
            forest::ForestParams {
                estimators: *estimators,
                max_depth: Some(*max_depth),
                max_features: *max_features,
                min_samples_leaf: *min_samples_leaf,
            },
            seed,
        )),
        Hyperparameters::GradientBoost {
            learning_rate,
            max_depth,
            estimators,
            subsample,
        } => FittedState::GradientBoost(GradientBoost::fit(
            &x,
            &y,
            boost::BoostParams {
                estimators: *estimators,
                learning_rate: *learning_rate,
                max_depth: *max_depth,
                subsample: *subsample,
            },
            seed,
        )),
        Hyperparameters::Mlp {
            activation,
            alpha,
            hidden_layer,
            ..
        } => FittedState::Mlp(Mlp::fit(
            &x,
            &y,
            mlp::MlpParams {
                hidden: *hidden_layer,
                activation: *activation,
                alpha: *alpha,
                tolerance: MLP_TOLERANCE,
                max_iter: MLP_MAX_ITER,
            },
            seed,
        )),
        Hyperparameters::NaiveBayes => FittedState::NaiveBayes(GaussianNb::fit(&x, &y)),
        Hyperparameters::Knn {
            neighbors, distance, ..
        } => FittedState::Knn(Knn::fit(&x, &y, *neighbors, *distance)),
        Hyperparameters::Svm { c, gamma, kernel } => {
            let kernel = match kernel {
                KernelKind::Rbf => Kernel::Rbf { gamma: *gamma },
                KernelKind::Poly => Kernel::Poly {
                    gamma: *gamma,
                    coef0: 0.0,
                    degree: POLY_DEGREE,
                },
            };
            FittedState::Svm(Svm::fit(
                &x,
                &y,
                svm::SvmParams {
                    c: *c,
                    kernel,
                    tolerance: SVM_TOLERANCE,
                },
            ))
        }
    };
    Ok(TrainedModel {
        schema: MODEL_SCHEMA.to_string(),
        kind: hp.kind(),
        hyperparameters: hp.clone(),
        selected_features: data.feature_names.clone(),
        standardizer,
        state,
        train_seed: seed,
    })
}

impl TrainedModel {
    /// Score whose sign is the decision: positive means internal. Takes raw
    /// features in `selected_features` order.
    pub fn score_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.selected_features.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} features, got {}",
                self.selected_features.len(),
                row.len()
            )));
        }
        let z = self.standardizer.transform_row(row);
        Ok(match &self.state {
            FittedState::DecisionTree(t) => t.predict(&z) - 0.5,
            FittedState::RandomForest(f) => f.probability(&z) - 0.5,
            FittedState::GradientBoost(g) => g.decision(&z),
            FittedState::Mlp(m) => m.decision(&z),
            FittedState::NaiveBayes(nb) => nb.decision(&z),
            FittedState::Knn(k) => {
                if k.predict(&z) {
                    1.0
                } else {
                    -1.0
                }
            }
            FittedState::Svm(s) => s.decision(&z),
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<ClassLabel> {
        Ok(if self.score_row(row)? > 0.0 {
            ClassLabel::Internal
        } else {
            ClassLabel::External
        })
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<ClassLabel>> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    /// Predicts a catalog vector, picking the model's features by name.
    pub fn predict(&self, x: &FeatureVector<f64>) -> Result<ClassLabel> {
        let row: Vec<f64> = self
            .selected_features
            .iter()
            .map(|n| {
                x.get(n)
                    .ok_or_else(|| Error::InvalidInput(format!("feature vector lacks model feature {n:?}")))
            })
            .collect::<Result<_>>()?;
        self.predict_row(&row)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidData(format!("model serialization: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel =
            serde_json::from_str(s).map_err(|e| Error::InvalidData(format!("model artifact: {e}")))?;
        if m.schema != MODEL_SCHEMA {
            return Err(Error::InvalidData(format!("unsupported model schema {:?}", m.schema)));
        }
        Ok(m)
    }
}

pub fn predict(model: &TrainedModel, x: &FeatureVector<f64>) -> Result<ClassLabel> {
    model.predict(x)
}
