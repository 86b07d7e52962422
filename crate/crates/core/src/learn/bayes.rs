use serde::{Deserialize, Serialize};

use super::data::Matrix;

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes; index 0 = external, 1 = internal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(x: &Matrix, y: &[bool]) -> GaussianNb {
        let d = x.cols();
        let mut count = [0usize; 2];
        let mut mean = [vec![0.0; d], vec![0.0; d]];
        let mut var = [vec![0.0; d], vec![0.0; d]];
        for i in 0..x.rows() {
            let c = usize::from(y[i]);
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for c in 0..2 {
            let n = count[c].max(1) as f64;
            mean[c].iter_mut().for_each(|m| *m /= n);
        }
        for i in 0..x.rows() {
            let c = usize::from(y[i]);
            for ((s, v), m) in var[c].iter_mut().zip(x.row(i)).zip(&mean[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            let n = count[c].max(1) as f64;
            var[c].iter_mut().for_each(|s| *s = (*s / n).max(VARIANCE_FLOOR));
        }
        let total = x.rows() as f64;
        let log_prior = [0, 1].map(|c| (count[c] as f64 / total).ln());
        GaussianNb { log_prior, mean, var }
    }

    pub fn log_likelihood(&self, class: usize, row: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.log_prior[class]
            + row
                .iter()
                .zip(&self.mean[class])
                .zip(&self.var[class])
                .map(|((v, m), s)| -0.5 * (ln_2pi + s.ln() + (v - m) * (v - m) / s))
                .sum::<f64>()
    }

    /// Log posterior odds of the internal class.
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.log_likelihood(1, row) - self.log_likelihood(0, row)
    }
}
