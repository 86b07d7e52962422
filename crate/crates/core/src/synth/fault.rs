use std::f64::consts::FRAC_PI_6;

use super::{phase_offset, Impedance, SynthConfig};
use crate::scenario::{FaultType, PhaseSet, ScenarioSpec};

/// Steady-state fault current of one phase: `amplitude * sin(w*tau + angle)`,
/// with `tau` measured from fault inception.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultPhasor {
    pub amplitude: f64,
    pub angle: f64,
}

impl FaultPhasor {
    /// Asymmetrical fault current including the decaying DC offset that makes
    /// the current continuous (zero) at inception.
    #[inline]
    pub fn current(&self, omega: f64, tau: f64, time_constant: f64) -> f64 {
        self.amplitude
            * ((omega * tau + self.angle).sin() - self.angle.sin() * (-tau / time_constant).exp())
    }
}

/// Per-phase fault current phasors for a shunt fault fed through `path`.
///
/// `inception` is the phase-a voltage angle at fault inception (radians).
pub fn fault_current_phasors(
    fault_type: FaultType,
    phases: PhaseSet,
    path: Impedance,
    fault_resistance: f64,
    zero_sequence_ratio: f64,
    peak_voltage: f64,
    inception: f64,
) -> [Option<FaultPhasor>; 3] {
    let mut out = [None; 3];
    match fault_type {
        FaultType::Ll => {
            // v_pq = v_p - v_q leads v_p by 30 degrees for q = p + 1.
            let Some(p) = phases.iter().find(|&p| phases.contains((p + 1) % 3)) else {
                return out;
            };
            let q = (p + 1) % 3;
            let loop_z = path.scale(2.0).add(Impedance::new(fault_resistance, 0.0));
            let amplitude = 3f64.sqrt() * peak_voltage / loop_z.magnitude();
            let angle = inception + phase_offset(p) + FRAC_PI_6 - loop_z.angle();
            out[p] = Some(FaultPhasor { amplitude, angle });
            out[q] = Some(FaultPhasor {
                amplitude,
                angle: angle + std::f64::consts::PI,
            });
        }
        _ => {
            let loop_z = if matches!(fault_type, FaultType::Lg | FaultType::Llg) {
                path.scale((2.0 + zero_sequence_ratio) / 3.0)
            } else {
                path
            }
            .add(Impedance::new(fault_resistance, 0.0));
            let amplitude = peak_voltage / loop_z.magnitude();
            for p in phases.iter() {
                out[p] = Some(FaultPhasor {
                    amplitude,
                    angle: inception + phase_offset(p) - loop_z.angle(),
                });
            }
        }
    }
    out
}

pub(crate) fn spec_phasors(spec: &ScenarioSpec, cfg: &SynthConfig, path: Impedance) -> [Option<FaultPhasor>; 3] {
    fault_current_phasors(
        spec.fault_type,
        spec.faulted_phases,
        path,
        spec.fault_resistance_ohm,
        cfg.network.zero_sequence_ratio,
        cfg.phase_peak_voltage() * spec.condition.voltage_pu,
        spec.inception_angle_deg.to_radians(),
    )
}

/// Noise-free differential current of a type-1 internal fault: the full
/// fault current, since both line ends feed it.
pub(crate) fn internal_fault_current(spec: &ScenarioSpec, cfg: &SynthConfig) -> [Vec<f64>; 3] {
    let n = cfg.sample_count();
    let n0 = cfg.fault_start_index();
    let dt = cfg.dt();
    let omega = cfg.omega();
    let mode = spec.condition.mode;
    let tau_c = cfg.network.tau(mode);
    let phasors = spec_phasors(spec, cfg, cfg.network.internal_path(mode));

    std::array::from_fn(|p| {
        let mut out = vec![0.0; n];
        if let Some(ph) = phasors[p] {
            for (k, v) in out.iter_mut().enumerate().skip(n0) {
                *v = ph.current(omega, (k - n0) as f64 * dt, tau_c);
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{enumerate_internal_type1, Mode};
    use crate::synth::synthesize_internal;

    fn find(ft: FaultType, r: f64, mode: Mode) -> ScenarioSpec {
        enumerate_internal_type1(42)
            .into_iter()
            .find(|s| s.fault_type == ft && s.fault_resistance_ohm == r && s.condition.mode == mode)
            .unwrap()
    }

    #[test]
    fn current_starts_at_zero() {
        let ph = FaultPhasor {
            amplitude: 100.0,
            angle: 1.1,
        };
        assert!(ph.current(377.0, 0.0, 0.03).abs() < 1e-12);
    }

    #[test]
    fn lllg_bolted_grid_fault_dominates_prefault() {
        let cfg = SynthConfig::default();
        let spec = find(FaultType::Lllg, 0.01, Mode::GridConnected);
        let w = synthesize_internal(&spec, &cfg).unwrap();
        let n0 = w.fault_start_index;
        for p in 0..3 {
            let pre = w.rms(p, 0..n0);
            let post = w.rms(p, n0..w.len());
            assert!(post >= 20.0 * pre, "phase {p}: post {post} pre {pre}");
        }
    }

    #[test]
    fn lg_fault_leaves_healthy_phases_at_noise() {
        let cfg = SynthConfig::default();
        let spec = find(FaultType::Lg, 1.0, Mode::Islanded);
        let w = synthesize_internal(&spec, &cfg).unwrap();
        let faulted = spec.faulted_phases.iter().next().unwrap();
        for p in (0..3).filter(|&p| p != faulted) {
            let rms = w.rms(p, w.fault_start_index..w.len());
            assert!(rms < 1.5 * cfg.noise_std(), "phase {p} rms {rms}");
        }
    }

    #[test]
    fn inception_angle_changes_offset_not_steady_state() {
        let cfg = SynthConfig::default();
        let mut a = find(FaultType::Lg, 0.1, Mode::GridConnected);
        a.inception_angle_deg = 0.0;
        let mut b = a.clone();
        b.inception_angle_deg = 90.0;
        let wa = synthesize_internal(&a, &cfg).unwrap();
        let wb = synthesize_internal(&b, &cfg).unwrap();
        let p = a.faulted_phases.iter().next().unwrap();
        // first cycle differs (offset envelope)
        let n0 = wa.fault_start_index;
        let first = n0..n0 + 167;
        let diff: f64 = first
            .clone()
            .map(|k| (wa.samples[p][k] - wb.samples[p][k]).abs())
            .sum::<f64>()
            / 167.0;
        assert!(diff > 50.0);
        // steady state: last 10 cycles, offset decayed by > 8 time constants
        let tail = wa.len() - 1667..wa.len();
        let ra = wa.rms(p, tail.clone());
        let rb = wb.rms(p, tail);
        assert!((ra - rb).abs() / ra < 0.02, "{ra} vs {rb}");
    }

    #[test]
    fn ll_currents_are_opposite() {
        let ph = fault_current_phasors(
            FaultType::Ll,
            PhaseSet::rotated(2, 2),
            Impedance::new(1.0, 5.0),
            0.0,
            3.0,
            1000.0,
            0.3,
        );
        let (c, a) = (ph[2].unwrap(), ph[0].unwrap());
        assert!(ph[1].is_none());
        for k in 0..50 {
            let t = k as f64 * 1e-4;
            assert!((c.current(377.0, t, 0.03) + a.current(377.0, t, 0.03)).abs() < 1e-9);
        }
    }
}
