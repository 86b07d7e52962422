//! Information-gain ranking over equal-frequency discretized features.

use serde::{Deserialize, Serialize};

use super::catalog::FeatureVector;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::ClassLabel;

pub const IG_BINS: usize = 16;

/// `(feature_name, information_gain)` sorted by gain descending, then name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub entries: Vec<RankedFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature_name: String,
    pub gain: f64,
}

impl FeatureRanking {
    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.feature_name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncated(&self, k: usize) -> FeatureRanking {
        FeatureRanking {
            entries: self.entries.iter().take(k).cloned().collect(),
        }
    }
}

/// Shannon entropy in bits of a two-class count pair.
fn binary_entropy(pos: usize, neg: usize) -> f64 {
    let n = (pos + neg) as f64;
    [pos, neg]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

pub fn label_entropy(labels: &[ClassLabel]) -> f64 {
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    binary_entropy(pos, labels.len() - pos)
}

/// Equal-frequency bin of every value. Values are ranked; a group of tied
/// values occupying ranks `first..=last` goes to bin
/// `floor(bins * (first + last) / (2n))`. Ties always share a bin, strictly
/// monotone transforms leave memberships unchanged and two distinct values
/// can never collapse into one bin when they are the only ones present.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    if n == 0 || bins <= 1 {
        return vec![0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0; n];
    let mut first = 0;
    while first < n {
        let mut last = first;
        while last + 1 < n && values[order[last + 1]] == values[order[first]] {
            last += 1;
        }
        let bin = (bins * (first + last) / (2 * n)).min(bins - 1);
        for &i in &order[first..=last] {
            out[i] = bin;
        }
        first = last + 1;
    }
    out
}

/// `H(label) - H(label | bin(feature))` in bits, clamped to `[0, H(label)]`.
pub fn information_gain_column(values: &[f64], labels: &[ClassLabel], bins: usize) -> f64 {
    assert_eq!(values.len(), labels.len(), "column and label lengths differ");
    let h = label_entropy(labels);
    let assign = equal_frequency_bins(values, bins);
    let n_bins = assign.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![(0usize, 0usize); n_bins];
    for (&b, l) in assign.iter().zip(labels) {
        if l.is_positive() {
            counts[b].0 += 1;
        } else {
            counts[b].1 += 1;
        }
    }
    let n = labels.len() as f64;
    let conditional: f64 = counts
        .iter()
        .map(|&(p, q)| (p + q) as f64 / n * binary_entropy(p, q))
        .sum();
    (h - conditional).clamp(0.0, h)
}

fn labels_of<T: Real>(dataset: &[FeatureVector<T>]) -> Result<Vec<ClassLabel>> {
    if dataset.is_empty() {
        return Err(Error::InvalidData("empty dataset".into()));
    }
    let labels: Vec<ClassLabel> = dataset
        .iter()
        .map(|fv| {
            fv.label
                .ok_or_else(|| Error::InvalidData(format!("feature vector {} has no label", fv.spec_id)))
        })
        .collect::<Result<_>>()?;
    if !labels.iter().any(|l| l.is_positive()) || labels.iter().all(|l| l.is_positive()) {
        return Err(Error::InvalidData("dataset must contain both labels".into()));
    }
    let names = &dataset[0].names;
    if dataset.iter().any(|fv| fv.names != *names) {
        return Err(Error::InvalidData("feature schemas differ across the dataset".into()));
    }
    Ok(labels)
}

fn column<T: Real>(dataset: &[FeatureVector<T>], idx: usize) -> Vec<f64> {
    dataset.iter().map(|fv| fv.values[idx].to_f64_lossy()).collect()
}

pub fn information_gain<T: Real>(dataset: &[FeatureVector<T>], feature_name: &str) -> Result<f64> {
    let labels = labels_of(dataset)?;
    let idx = dataset[0]
        .index_of(feature_name)
        .ok_or_else(|| Error::UnknownFeature(feature_name.to_string()))?;
    Ok(information_gain_column(&column(dataset, idx), &labels, IG_BINS))
}

/// Full ranking of the catalog.
pub fn rank_features<T: Real>(dataset: &[FeatureVector<T>]) -> Result<FeatureRanking> {
    let labels = labels_of(dataset)?;
    let mut entries: Vec<RankedFeature> = dataset[0]
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| RankedFeature {
            feature_name: name.clone(),
            gain: information_gain_column(&column(dataset, i), &labels, IG_BINS),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.gain
            .total_cmp(&a.gain)
            .then_with(|| a.feature_name.cmp(&b.feature_name))
    });
    Ok(FeatureRanking { entries })
}

/// The `k` highest-gain features.
pub fn select_top<T: Real>(dataset: &[FeatureVector<T>], k: usize) -> Result<FeatureRanking> {
    let catalog = dataset.first().map_or(0, |fv| fv.names.len());
    if k == 0 || k > catalog {
        return Err(Error::InvalidParameter(format!(
            "top-k must be in 1..={catalog}, got {k}"
        )));
    }
    Ok(rank_features(dataset)?.truncated(k))
}
