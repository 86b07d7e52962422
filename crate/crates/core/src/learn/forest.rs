use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Matrix;
use super::tree::{Criterion, Presorted, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub estimators: usize,
    pub max_depth: Option<usize>,
    /// Fraction of columns examined per split.
    pub max_features: f64,
    pub min_samples_leaf: usize,
}

/// Bagged gini trees; prediction averages leaf class fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

/// RNG of tree `t`; drives its bootstrap draw and then its feature sampling.
pub fn tree_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

pub fn bootstrap_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

pub fn features_per_split(fraction: f64, cols: usize) -> usize {
    ((fraction * cols as f64).ceil() as usize).clamp(1, cols.max(1))
}

impl RandomForest {
    pub fn fit(x: &Matrix, y: &[bool], params: ForestParams, seed: u64) -> RandomForest {
        let mf = features_per_split(params.max_features, x.cols());
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: (mf < x.cols()).then_some(mf),
        };
        let presorted = Presorted::new(x);
        let trees = (0..params.estimators.max(1))
            .map(|t| {
                let mut rng = tree_rng(seed, t);
                let sample = bootstrap_indices(x.rows(), &mut rng);
                Tree::fit_classifier_presorted(x, &presorted, y, &sample, Criterion::Gini, tree_params, &mut rng)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}
