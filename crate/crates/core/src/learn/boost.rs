use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::data::Matrix;
use super::forest::tree_rng;
use super::tree::{Presorted, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
}

/// Stage-wise additive regression trees on the logistic loss. Each stage fits
/// the negative gradient `y - p` by least squares and replaces the leaf values
/// with a single Newton step `sum(r) / sum(p(1 - p))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoost {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl GradientBoost {
    pub fn fit(x: &Matrix, y: &[bool], params: BoostParams, seed: u64) -> GradientBoost {
        let n = x.rows();
        let target: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
        let prior = (target.iter().sum::<f64>() / n as f64).clamp(1e-12, 1.0 - 1e-12);
        let init = (prior / (1.0 - prior)).ln();
        let mut raw = vec![init; n];
        let mut residual = vec![0.0; n];
        let tree_params = TreeParams {
            max_depth: Some(params.max_depth),
            min_samples_leaf: 1,
            max_features: None,
        };
        let take = ((params.subsample * n as f64).round() as usize).clamp(1, n);
        let presorted = Presorted::new(x);
        let mut trees = Vec::with_capacity(params.estimators);

        for m in 0..params.estimators {
            let mut rng = tree_rng(seed, m);
            let mut rows: Vec<usize> = if take < n {
                sample(&mut rng, n, take).into_vec()
            } else {
                (0..n).collect()
            };
            rows.sort_unstable();
            for i in 0..n {
                residual[i] = target[i] - sigmoid(raw[i]);
            }
            let mut tree = Tree::fit_regressor_presorted(x, &presorted, &residual, &rows, tree_params, &mut rng);

            let mut num = vec![0.0; tree.nodes.len()];
            let mut den = vec![0.0; tree.nodes.len()];
            for &i in &rows {
                let leaf = tree.leaf_index(x.row(i));
                let p = sigmoid(raw[i]);
                num[leaf] += residual[i];
                den[leaf] += p * (1.0 - p);
            }
            for leaf in 0..tree.nodes.len() {
                let v = if den[leaf].abs() < 1e-150 { 0.0 } else { num[leaf] / den[leaf] };
                tree.set_leaf_value(leaf, v);
            }
            for i in 0..n {
                raw[i] += params.learning_rate * tree.predict(x.row(i));
            }
            trees.push(tree);
        }
        GradientBoost {
            init,
            learning_rate: params.learning_rate,
            trees,
        }
    }

    /// Log-odds of the internal class.
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }
}
