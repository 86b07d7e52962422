use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::{fit, Hyperparameters};
use crate::error::{Error, Result};
use crate::metrics::{balanced_accuracy, ConfusionCounts};
use crate::scenario::ClassLabel;

/// Fold index of every row. Within each class the rows are ordered by id,
/// shuffled with a seeded stream and dealt round-robin, the deal continuing
/// across classes, so fold sizes differ by at most one both overall and per
/// class, and the assignment of an id does not depend on the row order.
pub fn stratified_folds(ids: &[u64], labels: &[ClassLabel], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = ids.len();
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("folds must be >= 2, got {folds}")));
    }
    if folds > n {
        return Err(Error::Stratification(format!("{folds} folds requested for {n} samples")));
    }
    let mut assignment = vec![0usize; n];
    let mut dealt = 0usize;
    for (stream, class) in [ClassLabel::Internal, ClassLabel::External].into_iter().enumerate() {
        let mut rows: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        rows.sort_by_key(|&i| ids[i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        rows.shuffle(&mut rng);
        for i in rows {
            assignment[i] = dealt % folds;
            dealt += 1;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_of: Vec<usize>,
    /// Out-of-fold prediction of every row.
    pub predictions: Vec<ClassLabel>,
    pub per_fold: Vec<ConfusionCounts>,
    /// Balanced accuracy per fold; `None` when the validation fold lacks a class.
    pub per_fold_balanced_accuracy: Vec<Option<f64>>,
    pub counts: ConfusionCounts,
    /// Balanced accuracy of the pooled out-of-fold predictions.
    pub score: f64,
}

/// Stratified k-fold cross-validation of one hyperparameter point. Each
/// training split is fitted with `seed`.
pub fn cross_validate(hp: &Hyperparameters, data: &Dataset, folds: usize, seed: u64) -> Result<CvResult> {
    let fold_of = stratified_folds(&data.ids, &data.labels, folds, seed)?;
    let mut predictions = vec![ClassLabel::External; data.len()];
    let mut per_fold = Vec::with_capacity(folds);
    for f in 0..folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != f).collect();
        let valid: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == f).collect();
        let train_set = data.subset(&train);
        let (pos, neg) = train_set.class_counts();
        if pos == 0 || neg == 0 {
            return Err(Error::Stratification(format!(
                "training split of fold {f} holds a single class"
            )));
        }
        let model = fit(hp, &train_set, seed)?;
        let mut counts = ConfusionCounts::default();
        for &i in &valid {
            let p = model.predict_row(data.x.row(i))?;
            predictions[i] = p;
            counts.record(p, data.labels[i]);
        }
        per_fold.push(counts);
    }
    let counts = per_fold.iter().fold(ConfusionCounts::default(), |a, &b| a.merge(b));
    Ok(CvResult {
        fold_of,
        predictions,
        per_fold_balanced_accuracy: per_fold.iter().map(|c| balanced_accuracy(c).ok()).collect(),
        per_fold,
        counts,
        score: balanced_accuracy(&counts)?,
    })
}
