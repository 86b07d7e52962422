//! Parametric three-phase differential-current synthesizer.
//!
//! The microgrid is reduced to a per-mode Thevenin source feeding the
//! protected line; internal faults inject current inside the zone, HIFs use
//! the anti-parallel DC-source arc model and external faults pass a
//! through-current that only shows up as differential current when the two
//! end CTs saturate unequally.

mod ct;
mod fault;
mod hif;
mod waveform;

pub use ct::{CtEnd, CtParams};
pub use fault::{fault_current_phasors, FaultPhasor};
pub use hif::{hif_current, HifModelParams};
pub use waveform::Waveform;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{EventType, Mode, ScenarioSpec};

/// ChaCha stream ids so each random process of a scenario is independent.
pub(crate) const NOISE_STREAM: u64 = 1;
pub(crate) const HIF_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub system_frequency_hz: f64,
    pub sampling_rate_hz: f64,
    pub record_length_s: f64,
    pub fault_start_s: f64,
    /// Peak phase current scale; noise std is `noise_rel_std * nominal_current_a`.
    pub nominal_current_a: f64,
    pub noise_rel_std: f64,
    pub network: NetworkParams,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            system_frequency_hz: 60.0,
            sampling_rate_hz: 10_000.0,
            record_length_s: 0.5,
            fault_start_s: 0.2,
            // 0.833 kA rms rated current
            nominal_current_a: 833.0 * std::f64::consts::SQRT_2,
            noise_rel_std: 0.01,
            network: NetworkParams::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.system_frequency_hz > 0.0) {
            return Err(Error::InvalidParameter("system_frequency_hz must be > 0".into()));
        }
        if !(self.sampling_rate_hz >= 40.0 * self.system_frequency_hz) {
            return Err(Error::InvalidParameter(
                "sampling_rate_hz must be at least 40x the system frequency".into(),
            ));
        }
        if !(self.fault_start_s > 0.0 && self.fault_start_s < self.record_length_s) {
            return Err(Error::InvalidParameter(
                "fault_start_s must lie strictly inside the record".into(),
            ));
        }
        if !(self.noise_rel_std >= 0.0) || !(self.nominal_current_a > 0.0) {
            return Err(Error::InvalidParameter(
                "noise_rel_std must be >= 0 and nominal_current_a > 0".into(),
            ));
        }
        self.network.validate()
    }

    pub fn sample_count(&self) -> usize {
        (self.record_length_s * self.sampling_rate_hz).round() as usize
    }

    pub fn fault_start_index(&self) -> usize {
        (self.fault_start_s * self.sampling_rate_hz).round() as usize
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sampling_rate_hz
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.system_frequency_hz
    }

    pub fn samples_per_cycle(&self) -> f64 {
        self.sampling_rate_hz / self.system_frequency_hz
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_rel_std * self.nominal_current_a
    }

    /// Peak phase-to-neutral voltage at 1 pu.
    pub fn phase_peak_voltage(&self) -> f64 {
        self.network.line_voltage_kv * 1e3 * std::f64::consts::SQRT_2 / 3f64.sqrt()
    }
}

/// Series impedance in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impedance {
    pub r: f64,
    pub x: f64,
}

impl Impedance {
    pub const fn new(r: f64, x: f64) -> Self {
        Impedance { r, x }
    }

    pub fn scale(self, k: f64) -> Self {
        Impedance::new(self.r * k, self.x * k)
    }

    pub fn add(self, o: Impedance) -> Self {
        Impedance::new(self.r + o.r, self.x + o.x)
    }

    pub fn magnitude(self) -> f64 {
        self.r.hypot(self.x)
    }

    pub fn angle(self) -> f64 {
        self.x.atan2(self.r)
    }
}

/// Thevenin abstraction of the microgrid around the protected line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkParams {
    /// Rms line-to-line voltage of the distribution lines.
    pub line_voltage_kv: f64,
    /// Positive-sequence source impedance, grid-connected.
    pub grid_source: Impedance,
    /// Islanded source impedance = grid source x this factor.
    pub islanded_source_factor: f64,
    /// Positive-sequence line impedance per km.
    pub line_per_km: Impedance,
    pub protected_line_km: f64,
    /// Internal fault location as a fraction of the protected line.
    pub internal_fault_fraction: f64,
    /// Distance of the external fault into the adjacent line.
    pub external_fault_km: f64,
    /// Zero-sequence / positive-sequence impedance ratio for ground faults.
    pub zero_sequence_ratio: f64,
    pub tau_grid_s: f64,
    pub tau_islanded_s: f64,
    /// Peak load current through the protected line at balanced loading.
    pub load_current_a: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            line_voltage_kv: 20.0,
            grid_source: Impedance::new(0.5, 3.0),
            islanded_source_factor: 5.0,
            line_per_km: Impedance::new(0.15, 0.35),
            protected_line_km: 30.0,
            internal_fault_fraction: 0.5,
            external_fault_km: 5.0,
            zero_sequence_ratio: 3.0,
            tau_grid_s: 0.030,
            tau_islanded_s: 0.015,
            load_current_a: 100.0,
        }
    }
}

impl NetworkParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            self.line_voltage_kv,
            self.islanded_source_factor,
            self.protected_line_km,
            self.zero_sequence_ratio,
            self.tau_grid_s,
            self.tau_islanded_s,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(
                "network voltages, lengths, ratios and time constants must be > 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.internal_fault_fraction) || self.external_fault_km < 0.0 {
            return Err(Error::InvalidParameter("fault location out of range".into()));
        }
        Ok(())
    }

    pub fn source(&self, mode: Mode) -> Impedance {
        match mode {
            Mode::GridConnected => self.grid_source,
            Mode::Islanded => self.grid_source.scale(self.islanded_source_factor),
        }
    }

    pub fn tau(&self, mode: Mode) -> f64 {
        match mode {
            Mode::GridConnected => self.tau_grid_s,
            Mode::Islanded => self.tau_islanded_s,
        }
    }

    /// Source-to-fault impedance for an internal fault.
    pub fn internal_path(&self, mode: Mode) -> Impedance {
        self.source(mode).add(
            self.line_per_km
                .scale(self.protected_line_km * self.internal_fault_fraction),
        )
    }

    /// Source-to-fault impedance for a fault beyond the remote bus.
    pub fn external_path(&self, mode: Mode) -> Impedance {
        self.source(mode).add(
            self.line_per_km
                .scale(self.protected_line_km + self.external_fault_km),
        )
    }
}

/// Model parameters shared by every scenario of a dataset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthModels {
    pub hif: HifModelParams,
    pub ct: CtParams,
}

/// Per-phase angle offsets of a positive-sequence set (radians).
pub(crate) fn phase_offset(phase: usize) -> f64 {
    -2.0 * std::f64::consts::PI / 3.0 * phase as f64
}

pub(crate) fn require_event(spec: &ScenarioSpec, expected: EventType) -> Result<()> {
    if spec.event_type != expected {
        return Err(Error::Contract(format!(
            "scenario {} is {}, expected {}",
            spec.id,
            spec.event_type.as_str(),
            expected.as_str()
        )));
    }
    Ok(())
}

/// Additive Gaussian measurement noise, from the scenario's own stream.
pub(crate) fn add_noise(samples: &mut [Vec<f64>; 3], spec: &ScenarioSpec, cfg: &SynthConfig) {
    let std = cfg.noise_std();
    if std == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    rng.set_stream(NOISE_STREAM);
    let normal = Normal::new(0.0, std).expect("finite noise std");
    for phase in samples.iter_mut() {
        for v in phase.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
}

pub fn synthesize_internal(spec: &ScenarioSpec, cfg: &SynthConfig) -> Result<Waveform<f64>> {
    require_event(spec, EventType::Type1Internal)?;
    cfg.validate()?;
    let mut samples = fault::internal_fault_current(spec, cfg);
    add_noise(&mut samples, spec, cfg);
    Ok(Waveform::new(samples, cfg, spec.id))
}

pub fn synthesize_hif(
    spec: &ScenarioSpec,
    cfg: &SynthConfig,
    hif: &HifModelParams,
) -> Result<Waveform<f64>> {
    Ok(hif::synthesize_hif_detailed(spec, cfg, hif)?.waveform)
}

pub use hif::{synthesize_hif_detailed, HifRecord};

pub fn synthesize_external(spec: &ScenarioSpec, cfg: &SynthConfig, ct: &CtParams) -> Result<Waveform<f64>> {
    Ok(ct::synthesize_external_detailed(spec, cfg, ct)?.waveform)
}

pub use ct::{synthesize_external_detailed, ExternalRecord};

/// Dispatch on the scenario's event type.
pub fn synthesize(spec: &ScenarioSpec, cfg: &SynthConfig, models: &SynthModels) -> Result<Waveform<f64>> {
    match spec.event_type {
        EventType::Type1Internal => synthesize_internal(spec, cfg),
        EventType::Type2Hif => synthesize_hif(spec, cfg, &models.hif),
        EventType::ExternalCtSat => synthesize_external(spec, cfg, &models.ct),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = SynthConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sample_count(), 5000);
        assert_eq!(cfg.fault_start_index(), 2000);
    }

    #[test]
    fn rejects_low_sampling_rate_and_bad_fault_start() {
        let mut cfg = SynthConfig {
            sampling_rate_hz: 1000.0,
            ..SynthConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.sampling_rate_hz = 10_000.0;
        cfg.fault_start_s = 0.6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn islanded_source_is_weaker() {
        let net = NetworkParams::default();
        assert!(
            net.internal_path(Mode::Islanded).magnitude()
                > net.internal_path(Mode::GridConnected).magnitude()
        );
        assert_eq!(
            net.source(Mode::Islanded),
            net.source(Mode::GridConnected).scale(5.0)
        );
    }
}
