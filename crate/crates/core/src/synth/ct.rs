//! Saturable CT pair on the protected line for through-faults.
//!
//! Each CT integrates the volt-seconds across its burden; the flux is hard
//! clamped at `saturation_flux_vs`, and while clamped the secondary only
//! carries what keeps the flux at the clamp (the rest goes to the
//! magnetizing branch). Unequal burdens make the two ends saturate at
//! different times, which is the only source of differential current.

use serde::{Deserialize, Serialize};

use super::fault::spec_phasors;
use super::{add_noise, phase_offset, require_event, SynthConfig, Waveform};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::{EventType, ScenarioSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CtParams {
    pub turns_ratio: f64,
    /// Burden at line end 1 and line end 2.
    pub burden_ohm: [f64; 2],
    pub saturation_flux_vs: f64,
    pub remanence_frac: f64,
}

impl Default for CtParams {
    fn default() -> Self {
        CtParams {
            turns_ratio: 200.0,
            burden_ohm: [0.5, 4.0],
            saturation_flux_vs: 0.12,
            remanence_frac: 0.1,
        }
    }
}

impl CtParams {
    fn validate(&self) -> Result<()> {
        if !(self.turns_ratio > 0.0) {
            return Err(Error::InvalidParameter("turns_ratio must be > 0".into()));
        }
        if self.burden_ohm.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::InvalidParameter("burdens must be >= 0".into()));
        }
        if !(self.saturation_flux_vs > 0.0) {
            return Err(Error::InvalidParameter("saturation flux must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.remanence_frac) {
            return Err(Error::InvalidParameter("remanence_frac must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Flux state of one CT core.
#[derive(Debug, Clone, Copy)]
pub struct CtEnd<T> {
    burden: T,
    flux_limit: T,
    flux: T,
}

impl<T: Real> CtEnd<T> {
    pub fn new(burden: T, flux_limit: T, remanence_frac: T) -> Self {
        let flux = if flux_limit.is_finite() {
            remanence_frac * flux_limit
        } else {
            T::zero()
        };
        CtEnd {
            burden,
            flux_limit,
            flux,
        }
    }

    pub fn flux(&self) -> T {
        self.flux
    }

    /// Advance one sample with ideal secondary current `ideal`; returns the
    /// delivered secondary current.
    pub fn step(&mut self, ideal: T, dt: T) -> T {
        let dflux = self.burden * ideal * dt;
        let next = self.flux + dflux;
        if next > self.flux_limit || next < -self.flux_limit {
            let clamp = if next > T::zero() { self.flux_limit } else { -self.flux_limit };
            let delivered = if self.burden * dt > T::zero() {
                (clamp - self.flux) / (self.burden * dt)
            } else {
                ideal
            };
            self.flux = clamp;
            delivered
        } else {
            self.flux = next;
            ideal
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExternalRecord {
    pub waveform: Waveform<f64>,
    /// Primary through-current per phase (load + fault).
    pub through_current: [Vec<f64>; 3],
    /// Noise-free differential current, primary amperes.
    pub clean_differential: [Vec<f64>; 3],
    /// Secondary currents at end 1 and end 2.
    pub secondary: [[Vec<f64>; 3]; 2],
}

impl ExternalRecord {
    /// First sample with nonzero noise-free differential current, any phase.
    pub fn differential_onset(&self) -> Option<usize> {
        (0..self.waveform.len()).find(|&k| self.clean_differential.iter().any(|ph| ph[k] != 0.0))
    }
}

pub fn synthesize_external_detailed(
    spec: &ScenarioSpec,
    cfg: &SynthConfig,
    ct: &CtParams,
) -> Result<ExternalRecord> {
    require_event(spec, EventType::ExternalCtSat)?;
    cfg.validate()?;
    ct.validate()?;

    let n = cfg.sample_count();
    let n0 = cfg.fault_start_index();
    let dt = cfg.dt();
    let omega = cfg.omega();
    let net = &cfg.network;
    let mode = spec.condition.mode;
    let tau_c = net.tau(mode);
    let phasors = spec_phasors(spec, cfg, net.external_path(mode));
    let load_scale = spec.condition.loading.phase_scale();
    let inception = spec.inception_angle_deg.to_radians();
    // 0.9 lagging load power factor
    let load_angle = 0.9f64.acos();

    let through: [Vec<f64>; 3] = std::array::from_fn(|p| {
        let load_amp = net.load_current_a * load_scale[p] * spec.condition.voltage_pu;
        (0..n)
            .map(|k| {
                let tau = (k as f64 - n0 as f64) * dt;
                let load = load_amp * (omega * tau + inception + phase_offset(p) - load_angle).sin();
                let fault = match phasors[p] {
                    Some(ph) if k >= n0 => ph.current(omega, tau, tau_c),
                    _ => 0.0,
                };
                load + fault
            })
            .collect()
    });

    let secondary: [[Vec<f64>; 3]; 2] = std::array::from_fn(|end| {
        std::array::from_fn(|p| {
            let mut core = CtEnd::new(ct.burden_ohm[end], ct.saturation_flux_vs, ct.remanence_frac);
            through[p]
                .iter()
                .map(|&i| core.step(i / ct.turns_ratio, dt))
                .collect()
        })
    });

    // End 2 measures the through-current with the opposite reference, so the
    // differential is (i1 - i2) referred back to the primary.
    let clean: [Vec<f64>; 3] = std::array::from_fn(|p| {
        secondary[0][p]
            .iter()
            .zip(&secondary[1][p])
            .map(|(a, b)| (a - b) * ct.turns_ratio)
            .collect()
    });

    let mut samples = clean.clone();
    add_noise(&mut samples, spec, cfg);
    Ok(ExternalRecord {
        waveform: Waveform::new(samples, cfg, spec.id),
        through_current: through,
        clean_differential: clean,
        secondary,
    })
}
