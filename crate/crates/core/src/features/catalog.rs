//! Fixed per-phase feature catalog computed on a post-inception window.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::stats;
use super::wavelet::{Cwt, WaveletParams};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::ClassLabel;
use crate::synth::Waveform;

pub const PHASE_NAMES: [&str; 3] = ["ia", "ib", "ic"];
pub const HARMONICS: usize = 10;
pub const HISTOGRAM_BINS: usize = 32;
pub const APEN_M: usize = 2;
pub const APEN_R_FRAC: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub system_frequency_hz: f64,
    /// Analysis window length after fault inception, in fundamental cycles.
    pub window_cycles: f64,
    pub wavelet: WaveletParams<f64>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            system_frequency_hz: 60.0,
            window_cycles: 2.0,
            wavelet: WaveletParams::default(),
        }
    }
}

/// Named feature values of one waveform. All vectors from one extractor share
/// the same `names`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub spec_id: u64,
    pub names: Arc<[String]>,
    pub values: Vec<T>,
    pub label: Option<ClassLabel>,
}

impl<T: Real> FeatureVector<T> {
    pub fn get(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.values[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn with_label(mut self, label: ClassLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

/// Feature names in catalog order.
pub fn feature_names(n_scales: usize) -> Vec<String> {
    let mut per_phase: Vec<String> = [
        "min", "max", "mean", "median", "std", "rms", "skewness", "kurtosis",
        "autocorr_lag1", "autocorr_half_cycle", "autocorr_cycle",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    per_phase.extend((1..=HARMONICS).map(|h| format!("fft_h{h}")));
    per_phase.push("hist_entropy".into());
    per_phase.push("approx_entropy".into());
    for s in 0..n_scales {
        per_phase.push(format!("cwt_max_s{s}"));
        per_phase.push(format!("cwt_energy_s{s}"));
    }
    PHASE_NAMES
        .iter()
        .flat_map(|ph| per_phase.iter().map(move |f| format!("{ph}__{f}")))
        .collect()
}

pub fn is_wavelet_feature(name: &str) -> bool {
    name.contains("__cwt_")
}

/// Reusable extractor: wavelet kernels are sampled once per sampling rate.
#[derive(Debug, Clone)]
pub struct Extractor<T> {
    config: FeatureConfig,
    sampling_rate_hz: f64,
    cwt: Cwt<T>,
    names: Arc<[String]>,
}

impl<T: Real> Extractor<T> {
    pub fn new(config: FeatureConfig, sampling_rate_hz: f64) -> Result<Self> {
        if !(config.window_cycles > 0.0) || !(config.system_frequency_hz > 0.0) {
            return Err(Error::InvalidParameter(
                "window_cycles and system_frequency_hz must be > 0".into(),
            ));
        }
        let params = WaveletParams {
            scales: config.wavelet.scales.iter().map(|&p| T::c(p)).collect(),
            shift_stride_samples: config.wavelet.shift_stride_samples,
            support_half_width: T::c(config.wavelet.support_half_width),
        };
        let cwt = Cwt::new(params, T::c(1.0 / sampling_rate_hz))?;
        let names: Arc<[String]> = feature_names(config.wavelet.scales.len()).into();
        Ok(Extractor {
            config,
            sampling_rate_hz,
            cwt,
            names,
        })
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn window_len(&self) -> usize {
        (self.config.window_cycles * self.sampling_rate_hz / self.config.system_frequency_hz).round() as usize
    }

    pub fn extract(&self, w: &Waveform<T>) -> Result<FeatureVector<T>> {
        if (w.sampling_rate_hz - self.sampling_rate_hz).abs() > 1e-9 * self.sampling_rate_hz {
            return Err(Error::InvalidInput(format!(
                "waveform {} sampled at {} Hz, extractor built for {} Hz",
                w.spec_id, w.sampling_rate_hz, self.sampling_rate_hz
            )));
        }
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!("waveform {} has non-finite samples", w.spec_id)));
        }
        let start = w.fault_start_index;
        let len = self.window_len();
        let end = start + len;
        if len < 2 || end > w.len() {
            return Err(Error::InvalidWindow(format!(
                "window [{start}, {end}) does not fit record of {} samples",
                w.len()
            )));
        }
        let spc = self.sampling_rate_hz / self.config.system_frequency_hz;
        let lags = [1usize, (spc / 2.0).round() as usize, spc.round() as usize];
        let fs = T::c(self.sampling_rate_hz);
        let f0 = T::c(self.config.system_frequency_hz);
        let shifts: Vec<usize> = (start..end).step_by(self.cwt.params().shift_stride_samples).collect();

        let mut values = Vec::with_capacity(self.names.len());
        for phase in 0..3 {
            let full = w.phase(phase);
            let x = &full[start..end];
            let sd = stats::std_dev(x);
            values.extend([
                stats::min(x),
                stats::max(x),
                stats::mean(x),
                stats::median(x),
                sd,
                stats::rms(x),
                stats::skewness(x),
                stats::kurtosis(x),
            ]);
            values.extend(lags.iter().map(|&l| stats::autocorrelation(x, l)));
            values.extend((1..=HARMONICS).map(|h| stats::tone_amplitude(x, f0 * T::from_usize_lossy(h), fs)));
            values.push(stats::histogram_entropy(x, HISTOGRAM_BINS));
            values.push(stats::approximate_entropy(x, APEN_M, T::c(APEN_R_FRAC) * sd));

            // Coefficients use the whole record so that wide scales are not
            // truncated by the short window; only the shifts lie in the window.
            let m = self.cwt.transform_at(full, &shifts)?;
            for s in 0..m.scales.len() {
                let (peak, energy) = m
                    .interior(s)
                    .fold((T::zero(), T::zero()), |(pk, en), c| (pk.max(c.abs()), en + c * c));
                values.push(peak);
                values.push(energy);
            }
        }
        debug_assert_eq!(values.len(), self.names.len());
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "feature {} of waveform {} is not finite",
                self.names[i], w.spec_id
            )));
        }
        Ok(FeatureVector {
            spec_id: w.spec_id,
            names: self.names.clone(),
            values,
            label: None,
        })
    }
}

/// One-shot extraction; prefer [`Extractor`] for many waveforms.
pub fn extract_features<T: Real>(w: &Waveform<T>, config: &FeatureConfig) -> Result<FeatureVector<T>> {
    Extractor::new(config.clone(), w.sampling_rate_hz)?.extract(w)
}
