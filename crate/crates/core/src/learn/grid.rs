use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvResult};
use super::data::Dataset;
use super::{Activation, ClassifierKind, Criterion, Distance, Hyperparameters, KernelKind};
use crate::error::{Error, Result};

pub const DEFAULT_ESTIMATOR_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTreeGrid {
    pub criterion: Vec<Criterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomForestGrid {
    pub max_depth: Vec<usize>,
    pub max_features: Vec<f64>,
    pub min_samples_leaf: Vec<usize>,
    pub estimators: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientBoostGrid {
    pub learning_rate: Vec<f64>,
    pub max_depth: Vec<usize>,
    pub estimators: Vec<usize>,
    pub subsample: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpGrid {
    pub activation: Vec<Activation>,
    pub alpha: Vec<f64>,
    pub hidden_layer: Vec<(usize, usize)>,
    /// Accepted for config compatibility; every value trains with L-BFGS.
    pub solver: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaiveBayesGrid {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnGrid {
    pub leaf_size: Vec<usize>,
    pub neighbors: Vec<usize>,
    pub distance: Vec<Distance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmGrid {
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub kernel: Vec<KernelKind>,
}

/// Candidate values per classifier. Points are the cartesian product of the
/// lists, in field order with the last field varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperGrid {
    /// Estimator counts above this are lowered to it (duplicates dropped).
    pub estimator_cap: usize,
    pub decision_tree: DecisionTreeGrid,
    pub random_forest: RandomForestGrid,
    pub gradient_boost: GradientBoostGrid,
    pub mlp: MlpGrid,
    pub naive_bayes: NaiveBayesGrid,
    pub knn: KnnGrid,
    pub svm: SvmGrid,
}

impl Default for HyperGrid {
    /// Coarse grid sized for a single-machine run. Contains the reference
    /// optimum of every classifier.
    fn default() -> Self {
        HyperGrid {
            estimator_cap: DEFAULT_ESTIMATOR_CAP,
            decision_tree: DecisionTreeGrid {
                criterion: vec![Criterion::Entropy, Criterion::Gini],
            },
            random_forest: RandomForestGrid {
                max_depth: vec![5, 10],
                max_features: vec![0.1, 0.5],
                min_samples_leaf: vec![5, 20],
                estimators: vec![500],
            },
            gradient_boost: GradientBoostGrid {
                learning_rate: vec![0.01, 0.1],
                max_depth: vec![5],
                estimators: vec![500],
                subsample: vec![0.5, 1.0],
            },
            mlp: MlpGrid {
                activation: vec![Activation::Logistic, Activation::Tanh, Activation::Relu],
                alpha: vec![1e-4, 1e-2],
                hidden_layer: vec![(88, 23)],
                solver: vec!["lbfgs".into()],
            },
            naive_bayes: NaiveBayesGrid {},
            knn: KnnGrid {
                leaf_size: vec![3],
                neighbors: vec![3, 4, 5, 10],
                distance: vec![Distance::Manhattan, Distance::Euclidean],
            },
            svm: SvmGrid {
                c: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
                gamma: vec![1e-4, 1e-3, 1e-2, 0.1, 1.0],
                kernel: vec![KernelKind::Rbf, KernelKind::Poly],
            },
        }
    }
}

fn dedup<T: PartialEq + Clone>(v: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

impl HyperGrid {
    /// Reads a TOML (`.toml`) or JSON (any other extension) grid file.
    pub fn load(path: &Path) -> Result<HyperGrid> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let grid: HyperGrid = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimator_cap == 0 {
            return Err(Error::Config("estimator_cap must be positive".into()));
        }
        for kind in ClassifierKind::ALL {
            let points = self.points(kind);
            if points.is_empty() {
                return Err(Error::Config(format!("grid for {kind} is empty")));
            }
            for p in &points {
                p.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    fn capped(&self, estimators: &[usize]) -> Vec<usize> {
        dedup(estimators.iter().map(|&e| e.min(self.estimator_cap)))
    }

    /// Grid points of `kind` in evaluation order.
    pub fn points(&self, kind: ClassifierKind) -> Vec<Hyperparameters> {
        let mut out = Vec::new();
        match kind {
            ClassifierKind::DecisionTree => {
                for &criterion in &self.decision_tree.criterion {
                    out.push(Hyperparameters::DecisionTree { criterion });
                }
            }
            ClassifierKind::RandomForest => {
                let g = &self.random_forest;
                for &max_depth in &g.max_depth {
                    for &max_features in &g.max_features {
                        for &min_samples_leaf in &g.min_samples_leaf {
                            for estimators in self.capped(&g.estimators) {
                                out.push(Hyperparameters::RandomForest {
                                    max_depth,
                                    max_features,
                                    min_samples_leaf,
                                    estimators,
                                });
                            }
                        }
                    }
                }
            }
            ClassifierKind::GradientBoost => {
                let g = &self.gradient_boost;
                for &learning_rate in &g.learning_rate {
                    for &max_depth in &g.max_depth {
                        for estimators in self.capped(&g.estimators) {
                            for &subsample in &g.subsample {
                                out.push(Hyperparameters::GradientBoost {
                                    learning_rate,
                                    max_depth,
                                    estimators,
                                    subsample,
                                });
                            }
                        }
                    }
                }
            }
            ClassifierKind::Mlp => {
                let g = &self.mlp;
                for &activation in &g.activation {
                    for &alpha in &g.alpha {
                        for &hidden_layer in &g.hidden_layer {
                            for solver in &g.solver {
                                out.push(Hyperparameters::Mlp {
                                    activation,
                                    alpha,
                                    hidden_layer,
                                    solver: solver.clone(),
                                });
                            }
                        }
                    }
                }
            }
            ClassifierKind::NaiveBayes => out.push(Hyperparameters::NaiveBayes),
            ClassifierKind::Knn => {
                let g = &self.knn;
                for &leaf_size in &g.leaf_size {
                    for &neighbors in &g.neighbors {
                        for &distance in &g.distance {
                            out.push(Hyperparameters::Knn {
                                leaf_size,
                                neighbors,
                                distance,
                            });
                        }
                    }
                }
            }
            ClassifierKind::Svm => {
                let g = &self.svm;
                for &c in &g.c {
                    for &gamma in &g.gamma {
                        for &kernel in &g.kernel {
                            out.push(Hyperparameters::Svm { c, gamma, kernel });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: Hyperparameters,
    pub score: f64,
    /// Cross-validation of the winning point.
    pub cv: CvResult,
    /// Every evaluated point with its CV score, in grid order.
    pub evaluated: Vec<(Hyperparameters, f64)>,
}

/// Evaluates `points` by stratified k-fold balanced accuracy and keeps the
/// best; ties go to the earliest point.
pub fn search_points(points: &[Hyperparameters], data: &Dataset, folds: usize, seed: u64) -> Result<GridResult> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty hyperparameter grid".into()));
    }
    let results: Vec<CvResult> = points
        .par_iter()
        .map(|hp| cross_validate(hp, data, folds, seed))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.score > results[best].score {
            best = i;
        }
    }
    let evaluated = points.iter().cloned().zip(results.iter().map(|r| r.score)).collect();
    Ok(GridResult {
        best: points[best].clone(),
        score: results[best].score,
        cv: results.into_iter().nth(best).expect("best index in range"),
        evaluated,
    })
}

pub fn grid_search(
    kind: ClassifierKind,
    grid: &HyperGrid,
    data: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<GridResult> {
    search_points(&grid.points(kind), data, folds, seed)
}
