//! Synthetic line-differential protection events for a small microgrid,
//! wavelet/statistical feature extraction, information-gain feature
//! selection and a benchmark of seven binary classifiers that separate
//! internal faults (including high-impedance faults) from external faults
//! with CT saturation.
//!
//! The numeric kernels (Mexican-hat wavelet, CWT, window statistics, HIF arc
//! current, CT flux model, protection metrics) are generic over the scalar
//! type through [`Real`]; the aliases below pin the common `f64` / `f32`
//! instantiations.

pub mod error;
pub mod features;
pub mod learn;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod scenario;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

pub use metrics::{ConfusionCounts, EvalReport};
pub use scenario::{ClassLabel, EventType, FaultType, OperatingCondition, ScenarioSpec};

/// Three-phase differential-current record in double precision.
pub type Waveform = synth::Waveform<f64>;
/// Single-precision waveform, e.g. for compact archives.
pub type Waveform32 = synth::Waveform<f32>;
/// Feature vector with `f64` values (the pipeline's working precision).
pub type FeatureVector = features::FeatureVector<f64>;
pub type FeatureVector32 = features::FeatureVector<f32>;
/// Wavelet configuration in seconds.
pub type WaveletParams = features::WaveletParams<f64>;
pub type Cwt = features::Cwt<f64>;
pub type Cwt32 = features::Cwt<f32>;
