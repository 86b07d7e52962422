//! Windowed feature extraction and information-gain feature selection.

pub mod catalog;
pub mod selection;
pub mod stats;
pub mod wavelet;

pub use catalog::{extract_features, feature_names, is_wavelet_feature, Extractor, FeatureConfig, FeatureVector};
pub use selection::{information_gain, rank_features, select_top, FeatureRanking, RankedFeature};
pub use wavelet::{cwt, mexican_hat, Cwt, CwtMatrix, WaveletParams};
