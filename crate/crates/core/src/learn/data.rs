use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scenario::ClassLabel;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data has {} values, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            data.extend(f(self.row(i)));
        }
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Labelled samples over a named feature subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<u64>,
    pub x: Matrix,
    pub labels: Vec<ClassLabel>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(ids: Vec<u64>, x: Matrix, labels: Vec<ClassLabel>, feature_names: Vec<String>) -> Result<Self> {
        if ids.len() != x.rows() || labels.len() != x.rows() || feature_names.len() != x.cols() {
            return Err(Error::InvalidInput("dataset dimensions disagree".into()));
        }
        Ok(Dataset {
            ids,
            x,
            labels,
            feature_names,
        })
    }

    /// Projects labelled feature vectors onto `selected` features, in that order.
    pub fn from_vectors(vectors: &[FeatureVector<f64>], selected: &[String]) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::InvalidData("no feature vectors".into()));
        };
        let cols: Vec<usize> = selected
            .iter()
            .map(|n| first.index_of(n).ok_or_else(|| Error::UnknownFeature(n.clone())))
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(vectors.len() * cols.len());
        let mut labels = Vec::with_capacity(vectors.len());
        for fv in vectors {
            if fv.names != first.names {
                return Err(Error::InvalidData(format!("vector {} has a different schema", fv.spec_id)));
            }
            data.extend(cols.iter().map(|&c| fv.values[c]));
            labels.push(
                fv.label
                    .ok_or_else(|| Error::InvalidData(format!("vector {} has no label", fv.spec_id)))?,
            );
        }
        Dataset::new(
            vectors.iter().map(|v| v.spec_id).collect(),
            Matrix::new(vectors.len(), cols.len(), data)?,
            labels,
            selected.to_vec(),
        )
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            ids: idx.iter().map(|&i| self.ids[i]).collect(),
            x: self.x.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        (pos, self.len() - pos)
    }

    pub fn positive_mask(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l.is_positive()).collect()
    }

    /// Training preconditions shared by every learner.
    pub fn check_trainable(&self) -> Result<()> {
        let (pos, neg) = self.class_counts();
        if pos == 0 || neg == 0 {
            return Err(Error::InvalidData("training set must contain both classes".into()));
        }
        if !self.x.is_finite() {
            return Err(Error::InvalidData("training features must be finite".into()));
        }
        Ok(())
    }
}

/// Z-score parameters estimated on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mut mean = vec![0.0; x.cols()];
        for i in 0..x.rows() {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; x.cols()];
        for i in 0..x.rows() {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        x.map_rows(|r| self.transform_row(r))
    }
}
