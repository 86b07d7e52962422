//! Confusion counts and the protection metrics. Positive class = internal fault.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl ConfusionCounts {
    pub fn from_predictions(pairs: impl IntoIterator<Item = (ClassLabel, ClassLabel)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (predicted, actual) in pairs {
            c.record(predicted, actual);
        }
        c
    }

    pub fn record(&mut self, predicted: ClassLabel, actual: ClassLabel) {
        match (actual.is_positive(), predicted.is_positive()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
        }
    }

    pub fn merge(self, o: ConfusionCounts) -> Self {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
        }
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

fn ratio<T: Real>(num: u64, den: u64) -> T {
    T::c(num as f64) / T::c(den as f64)
}

/// Recall on internal faults, `TP / (TP + FN)`.
pub fn dependability<T: Real>(c: &ConfusionCounts) -> Result<T> {
    if c.positives() == 0 {
        return Err(Error::UndefinedMetric("dependability needs internal samples"));
    }
    Ok(ratio(c.tp, c.positives()))
}

/// True-negative rate on external faults, `TN / (TN + FP)`.
pub fn security<T: Real>(c: &ConfusionCounts) -> Result<T> {
    if c.negatives() == 0 {
        return Err(Error::UndefinedMetric("security needs external samples"));
    }
    Ok(ratio(c.tn, c.negatives()))
}

/// `(dependability + security) / 2`.
pub fn balanced_accuracy<T: Real>(c: &ConfusionCounts) -> Result<T> {
    let d: T = dependability(c)?;
    let s: T = security(c)?;
    Ok((d + s) / T::c(2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: String,
    pub hyperparameters: serde_json::Value,
    pub counts: ConfusionCounts,
    pub balanced_accuracy: f64,
    pub dependability: f64,
    pub security: f64,
    /// Dependability on the HIF subset alone, when present.
    pub hif_dependability: Option<f64>,
    /// Mean cross-validated balanced accuracy found by the grid search.
    pub cv_score: f64,
}

impl EvalReport {
    pub fn new(
        classifier: impl Into<String>,
        hyperparameters: serde_json::Value,
        counts: ConfusionCounts,
        hif_counts: Option<ConfusionCounts>,
        cv_score: f64,
    ) -> Result<Self> {
        let dependability = dependability::<f64>(&counts)?;
        let security = security::<f64>(&counts)?;
        Ok(EvalReport {
            classifier: classifier.into(),
            hyperparameters,
            counts,
            balanced_accuracy: (dependability + security) / 2.0,
            dependability,
            security,
            hif_dependability: hif_counts.and_then(|c| crate::metrics::dependability(&c).ok()),
            cv_score,
        })
    }
}

/// Table-shaped CSV: classifier, balanced accuracy, dependability, security.
pub fn write_summary_csv<W: std::io::Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidData(format!("summary csv: {e}"));
    w.write_record(["classifier", "balanced_accuracy", "dependability", "security", "hif_dependability"])
        .map_err(io)?;
    for r in reports {
        w.write_record([
            r.classifier.clone(),
            r.balanced_accuracy.to_string(),
            r.dependability.to_string(),
            r.security.to_string(),
            r.hif_dependability.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidData(format!("summary csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn cc(tp: u64, fn_: u64, tn: u64, fp: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fn_, tn, fp }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(balanced_accuracy::<f64>(&cc(10, 0, 10, 0)).unwrap(), 1.0);
        assert!((balanced_accuracy::<f64>(&cc(9, 1, 8, 2)).unwrap() - 0.85).abs() < 1e-15);
        assert_eq!(balanced_accuracy::<f64>(&cc(50, 0, 0, 50)).unwrap(), 0.5);
        assert_eq!(dependability::<f64>(&cc(7, 0, 1, 1)).unwrap(), 1.0);
        assert_eq!(dependability::<f64>(&cc(126, 874, 5, 0)).unwrap(), 0.126);
        assert_eq!(security::<f64>(&cc(1, 1, 3, 0)).unwrap(), 1.0);
        assert_eq!(security::<f32>(&cc(1, 1, 50, 50)).unwrap(), 0.5);
    }

    #[test]
    fn empty_classes_are_undefined() {
        assert!(dependability::<f64>(&cc(0, 0, 3, 1)).is_err());
        assert!(security::<f64>(&cc(3, 1, 0, 0)).is_err());
        assert!(balanced_accuracy::<f64>(&cc(0, 0, 3, 1)).is_err());
    }

    #[test]
    fn report_identity_is_exact() {
        let r = EvalReport::new("svm", serde_json::json!({}), cc(123, 4, 77, 9), None, 0.9).unwrap();
        assert_eq!(r.balanced_accuracy, (r.dependability + r.security) / 2.0);
    }

    proptest! {
        #[test]
        fn metrics_bounded_and_consistent(tp in 0u64..500, fn_ in 0u64..500, tn in 0u64..500, fp in 0u64..500) {
            prop_assume!(tp + fn_ > 0 && tn + fp > 0);
            let c = cc(tp, fn_, tn, fp);
            let d: f64 = dependability(&c).unwrap();
            let s: f64 = security(&c).unwrap();
            let b: f64 = balanced_accuracy(&c).unwrap();
            prop_assert!((0.0..=1.0).contains(&d) && (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&b));
            prop_assert_eq!(b, (d + s) / 2.0);
            prop_assert!((d + fn_ as f64 / (tp + fn_) as f64 - 1.0).abs() < 1e-12);
        }
    }
}
