use serde::{Deserialize, Serialize};

use super::SynthConfig;
use crate::scalar::Real;

/// Sampled differential current of the three phases (amperes, primary side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform<T> {
    pub samples: [Vec<T>; 3],
    pub sampling_rate_hz: f64,
    pub fault_start_index: usize,
    pub spec_id: u64,
}

impl Waveform<f64> {
    pub(crate) fn new(samples: [Vec<f64>; 3], cfg: &SynthConfig, spec_id: u64) -> Self {
        Waveform {
            samples,
            sampling_rate_hz: cfg.sampling_rate_hz,
            fault_start_index: cfg.fault_start_index(),
            spec_id,
        }
    }
}

impl<T: Real> Waveform<T> {
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phase(&self, p: usize) -> &[T] {
        &self.samples[p]
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sampling_rate_hz
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().flatten().all(|v| v.is_finite())
    }

    /// Rms of one phase over `range`.
    pub fn rms(&self, phase: usize, range: std::ops::Range<usize>) -> T {
        let s = &self.samples[phase][range];
        if s.is_empty() {
            return T::zero();
        }
        let sum = s.iter().fold(T::zero(), |acc, &v| acc + v * v);
        (sum / T::from_usize_lossy(s.len())).sqrt()
    }

    pub fn cast<U: Real>(&self) -> Waveform<U> {
        let conv = |v: &Vec<T>| v.iter().map(|&x| U::c(x.to_f64_lossy())).collect();
        Waveform {
            samples: [
                conv(&self.samples[0]),
                conv(&self.samples[1]),
                conv(&self.samples[2]),
            ],
            sampling_rate_hz: self.sampling_rate_hz,
            fault_start_index: self.fault_start_index,
            spec_id: self.spec_id,
        }
    }
}
