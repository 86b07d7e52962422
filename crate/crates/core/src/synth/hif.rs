//! High-impedance arc fault: two anti-parallel DC sources `Vp > 0 > Vn`, each
//! in series with a diode and a randomly varying resistor. The arc conducts
//! only while the phase voltage is outside the dead band `(Vn, Vp)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{add_noise, phase_offset, require_event, SynthConfig, Waveform, HIF_STREAM};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::{EventType, ScenarioSpec};

/// Arc current for phase voltage `v_ph`.
pub fn hif_current<T: Real>(v_ph: T, vp: T, vn: T, rp: T, rn: T) -> Result<T> {
    if !(rp > T::zero()) || !(rn > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "arc resistances must be positive (rp = {rp}, rn = {rn})"
        )));
    }
    if !(vn < vp) {
        return Err(Error::InvalidParameter(format!(
            "dead band requires vn < vp (vn = {vn}, vp = {vp})"
        )));
    }
    Ok(if v_ph > vp {
        (v_ph - vp) / rp
    } else if v_ph < vn {
        (v_ph - vn) / rn
    } else {
        T::zero()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HifModelParams {
    /// `|Vp|` and `|Vn|` are drawn from this fraction of the peak phase voltage.
    pub source_frac_range: [f64; 2],
    /// Minimum `||Vp| - |Vn||`, as a fraction of peak phase voltage.
    pub min_asymmetry_frac: f64,
    pub rp_range_ohm: [f64; 2],
    pub rn_range_ohm: [f64; 2],
    pub resistance_update_interval_s: f64,
    /// Per-half-cycle relative jitter of the DC sources.
    pub source_jitter_rel: f64,
}

impl Default for HifModelParams {
    fn default() -> Self {
        HifModelParams {
            source_frac_range: [0.2, 0.5],
            min_asymmetry_frac: 0.02,
            rp_range_ohm: [50.0, 300.0],
            rn_range_ohm: [50.0, 300.0],
            resistance_update_interval_s: 0.0002,
            source_jitter_rel: 0.1,
        }
    }
}

impl HifModelParams {
    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.source_frac_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidParameter("source_frac_range must be positive and ordered".into()));
        }
        if !(self.min_asymmetry_frac >= 0.0 && self.min_asymmetry_frac < hi - lo) {
            return Err(Error::InvalidParameter(
                "min_asymmetry_frac must be smaller than the source range width".into(),
            ));
        }
        for [a, b] in [self.rp_range_ohm, self.rn_range_ohm] {
            if !(a > 0.0 && b >= a) {
                return Err(Error::InvalidParameter("arc resistance ranges must be positive and ordered".into()));
            }
        }
        if !(self.resistance_update_interval_s > 0.0) {
            return Err(Error::InvalidParameter("resistance update interval must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.source_jitter_rel) {
            return Err(Error::InvalidParameter("source jitter must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Everything the arc model produced for one scenario, before and after noise.
#[derive(Debug, Clone)]
pub struct HifRecord {
    pub waveform: Waveform<f64>,
    pub faulted_phase: usize,
    /// Noise-free arc current of the faulted phase.
    pub clean_current: Vec<f64>,
    pub phase_voltage: Vec<f64>,
    /// Instantaneous source voltages and resistances; zero before inception.
    pub vp: Vec<f64>,
    pub vn: Vec<f64>,
    pub rp: Vec<f64>,
    pub rn: Vec<f64>,
    /// Scenario-level source magnitudes before jitter.
    pub vp_nominal: f64,
    pub vn_nominal: f64,
    /// Samples between resistance redraws.
    pub update_interval_samples: usize,
}

pub fn synthesize_hif_detailed(
    spec: &ScenarioSpec,
    cfg: &SynthConfig,
    params: &HifModelParams,
) -> Result<HifRecord> {
    require_event(spec, EventType::Type2Hif)?;
    cfg.validate()?;
    params.validate()?;
    let faulted_phase = spec
        .faulted_phases
        .iter()
        .next()
        .filter(|_| spec.faulted_phases.len() == 1)
        .ok_or_else(|| Error::Contract(format!("HIF scenario {} must fault exactly one phase", spec.id)))?;

    let n = cfg.sample_count();
    let n0 = cfg.fault_start_index();
    let dt = cfg.dt();
    let omega = cfg.omega();
    let v_peak = cfg.phase_peak_voltage();
    let update = ((params.resistance_update_interval_s * cfg.sampling_rate_hz).round() as usize).max(1);
    let half_cycle = cfg.samples_per_cycle() / 2.0;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    rng.set_stream(HIF_STREAM);
    let [lo, hi] = params.source_frac_range;
    let (vp_frac, vn_frac) = loop {
        let a: f64 = rng.gen_range(lo..=hi);
        let b: f64 = rng.gen_range(lo..=hi);
        if (a - b).abs() >= params.min_asymmetry_frac {
            break (a, b);
        }
    };
    let vp_nominal = vp_frac * v_peak;
    let vn_nominal = -vn_frac * v_peak;

    let amplitude = v_peak * spec.condition.voltage_pu;
    let theta = spec.inception_angle_deg.to_radians() + phase_offset(faulted_phase);
    let phase_voltage: Vec<f64> = (0..n)
        .map(|k| amplitude * (omega * (k as f64 - n0 as f64) * dt + theta).sin())
        .collect();

    let mut clean = vec![0.0; n];
    let (mut vp, mut vn, mut rp, mut rn) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let jitter = params.source_jitter_rel;
    let draw_jitter = |rng: &mut ChaCha8Rng| {
        if jitter > 0.0 {
            1.0 + rng.gen_range(-jitter..=jitter)
        } else {
            1.0
        }
    };
    let mut cur_half = usize::MAX;
    let mut cur_seg = usize::MAX;
    let (mut vp_k, mut vn_k, mut rp_k, mut rn_k) = (0.0, 0.0, 0.0, 0.0);
    for k in n0..n {
        let rel = k - n0;
        let half = (rel as f64 / half_cycle).floor() as usize;
        if half != cur_half {
            cur_half = half;
            vp_k = vp_nominal * draw_jitter(&mut rng);
            vn_k = vn_nominal * draw_jitter(&mut rng);
        }
        let seg = rel / update;
        if seg != cur_seg {
            cur_seg = seg;
            rp_k = rng.gen_range(params.rp_range_ohm[0]..=params.rp_range_ohm[1]);
            rn_k = rng.gen_range(params.rn_range_ohm[0]..=params.rn_range_ohm[1]);
        }
        vp[k] = vp_k;
        vn[k] = vn_k;
        rp[k] = rp_k;
        rn[k] = rn_k;
        clean[k] = hif_current(phase_voltage[k], vp_k, vn_k, rp_k, rn_k)?;
    }

    let mut samples: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    samples[faulted_phase].copy_from_slice(&clean);
    add_noise(&mut samples, spec, cfg);

    Ok(HifRecord {
        waveform: Waveform::new(samples, cfg, spec.id),
        faulted_phase,
        clean_current: clean,
        phase_voltage,
        vp,
        vn,
        rp,
        rn,
        vp_nominal,
        vn_nominal,
        update_interval_samples: update,
    })
}
