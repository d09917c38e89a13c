//! Pulsed current-sensing parity checker (PCSPC).
//!
//! The accumulated row current charges capacitor `c1` during the data
//! window. Each time the voltage reaches `v_th` a local reset discharges it,
//! so the residual voltage after `h` unit currents is `~v_th/2` for odd `h`
//! and `~0` for even `h`, and the number of reset pulses is `floor(h/2)`.
//! A comparator samples the residual against `v_ref` shortly before the
//! global reset; the parity bit is inverted on the way out to cancel the
//! constant-bias column's contribution.
//!
//! Calibration ties the ramp to the unit current: two unit currents
//! integrate to exactly `v_th` over the data window
//! (`c1 = 2 * i_unit * charge_window / v_th`).
//!
//! One modeling refinement: a conducting row pre-charges `c1` by a small
//! constant `establish_charge` before the data window (the constant-bias
//! branch conducts while the line settles). Without it an even Hamming
//! weight lands exactly on a reset boundary, where an infinitesimal current
//! deficit would swing the residual from 0 to `v_th`; the pre-charge moves
//! nominal charges off the boundaries while leaving the pulse law intact.
//!
//! Local resets are instantaneous, the threshold judge has no delay, and
//! charging does not perturb the row current. Integration is fixed-step
//! forward Euler; threshold crossings carry the overshoot into the next
//! ramp, so accumulated charge stays exact.

use crate::error::SimError;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// PCSPC electrical and timing parameters. SI units throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcspcParams {
    /// Integration capacitance (farads).
    pub c1: f64,
    /// Local-reset threshold voltage.
    pub v_th: f64,
    /// Comparator reference, nominally `v_th / 4`.
    pub v_ref: f64,
    /// Data (GRC-low) window during which the row current charges `c1`.
    pub charge_window: f64,
    /// Settling margin between the end of the data window and the global
    /// reset edge; the comparator samples inside this plateau.
    pub hold_time: f64,
    /// Comparator lead time before the global reset edge.
    pub t_d: f64,
    /// Pre-charge applied to `c1` whenever the row conducts (volts).
    pub establish_charge: f64,
    /// Comparator input-referred noise sigma (volts).
    pub comparator_noise_sigma: f64,
    /// Integration step of the simulator.
    pub time_step: f64,
}

impl PcspcParams {
    /// Full readout cycle: data window plus settling margin.
    pub fn grc_period(&self) -> f64 {
        self.charge_window + self.hold_time
    }

    /// Instant at which the comparator samples.
    pub fn sample_time(&self) -> f64 {
        self.grc_period() - self.t_d
    }

    /// Checks internal consistency and the calibration identity
    /// `2 * i_unit * charge_window / c1 == v_th`.
    pub fn validate(&self, i_unit: f64) -> Result<(), SimError> {
        for (name, v) in [
            ("c1", self.c1),
            ("v_th", self.v_th),
            ("v_ref", self.v_ref),
            ("charge_window", self.charge_window),
            ("hold_time", self.hold_time),
            ("t_d", self.t_d),
            ("establish_charge", self.establish_charge),
            ("comparator_noise_sigma", self.comparator_noise_sigma),
            ("time_step", self.time_step),
        ] {
            if !v.is_finite() {
                return Err(SimError::invalid(format!("pcspc: {name} must be finite")));
            }
        }
        if self.c1 <= 0.0 || self.v_th <= 0.0 || self.charge_window <= 0.0 || self.time_step <= 0.0
        {
            return Err(SimError::invalid(
                "pcspc: c1, v_th, charge_window, time_step must be positive",
            ));
        }
        if !(self.v_ref > 0.0 && self.v_ref < self.v_th / 2.0) {
            return Err(SimError::invalid("pcspc: require 0 < v_ref < v_th/2"));
        }
        if self.t_d < 0.0 || self.t_d >= self.grc_period() {
            return Err(SimError::invalid("pcspc: require 0 <= t_d < grc period"));
        }
        if self.hold_time < 0.0 {
            return Err(SimError::invalid("pcspc: hold_time must be >= 0"));
        }
        if !(0.0..self.v_ref).contains(&self.establish_charge) {
            return Err(SimError::invalid(
                "pcspc: require 0 <= establish_charge < v_ref",
            ));
        }
        if self.comparator_noise_sigma < 0.0 {
            return Err(SimError::invalid("pcspc: negative comparator noise"));
        }
        let ramp = 2.0 * i_unit * self.charge_window / self.c1;
        if (ramp - self.v_th).abs() > 1e-6 * self.v_th {
            return Err(SimError::invalid(format!(
                "pcspc: calibration identity violated, 2*i_unit*window/c1 = {ramp} != v_th {}",
                self.v_th
            )));
        }
        Ok(())
    }
}

impl Default for PcspcParams {
    fn default() -> Self {
        calibrate_params(4.0e-6, 40.0e6, 0.8)
    }
}

/// Derives calibrated parameters from the unit current, the GRC frequency
/// (whose period is the data window), and the reset threshold.
pub fn calibrate_params(i_unit: f64, grc_frequency: f64, v_th: f64) -> PcspcParams {
    assert!(
        i_unit > 0.0 && grc_frequency > 0.0 && v_th > 0.0,
        "calibrate_params: inputs must be positive"
    );
    let charge_window = 1.0 / grc_frequency;
    let hold_time = 2.0e-9;
    PcspcParams {
        c1: 2.0 * i_unit * charge_window / v_th,
        v_th,
        v_ref: v_th / 4.0,
        charge_window,
        hold_time,
        t_d: 1.0e-9,
        establish_charge: 0.0875 * v_th,
        comparator_noise_sigma: 0.0,
        time_step: (charge_window + hold_time) / 1000.0,
    }
}

/// Readout outcome for one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcspcTrace {
    /// Number of local-reset ramp pulses during the data window.
    pub ramp_pulse_count: u32,
    /// Capacitor voltage at the comparator sample instant (before noise).
    pub v_charge_at_sample: f64,
    /// Raw comparator decision: residual above `v_ref`.
    pub comparator_bit: bool,
    /// Final XOR output; inverted comparator bit (bias-column cancellation).
    pub xor_out: bool,
}

/// Waveform annotation for trace dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    Charge,
    LocalReset,
    Sample,
    GlobalReset,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Charge => "charge",
            TraceEvent::LocalReset => "local_reset",
            TraceEvent::Sample => "sample",
            TraceEvent::GlobalReset => "global_reset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time: f64,
    pub v_charge: f64,
    pub event: TraceEvent,
}

fn integrate(
    i_mc: f64,
    p: &PcspcParams,
    rng: &mut impl Rng,
    mut waveform: Option<&mut Vec<TracePoint>>,
) -> PcspcTrace {
    assert!(
        i_mc.is_finite() && i_mc >= 0.0,
        "simulate_readout: i_mc must be finite and non-negative, got {i_mc}"
    );

    let slope = i_mc / p.c1;
    let eps = 1e-9 * p.v_th;
    let sample_time = p.sample_time();

    let mut v = if i_mc > 0.0 { p.establish_charge } else { 0.0 };
    let mut pulses: u32 = 0;
    let mut t = 0.0;

    if let Some(w) = waveform.as_deref_mut() {
        w.push(TracePoint {
            time: 0.0,
            v_charge: v,
            event: TraceEvent::Charge,
        });
    }

    // Fixed-step charge phase, with a partial step landing exactly on each
    // point of interest (sample instant, window end).
    let advance_to = |state_t: &mut f64,
                      state_v: &mut f64,
                      pulses: &mut u32,
                      target: f64,
                      waveform: &mut Option<&mut Vec<TracePoint>>| {
        while *state_t < target - 1e-18 {
            let step = p.time_step.min(target - *state_t);
            *state_t += step;
            *state_v += slope * step;
            let mut event = TraceEvent::Charge;
            while *state_v >= p.v_th - eps {
                *state_v -= p.v_th; // carry the overshoot into the next ramp
                *pulses += 1;
                event = TraceEvent::LocalReset;
            }
            if let Some(w) = waveform.as_deref_mut() {
                w.push(TracePoint {
                    time: *state_t,
                    v_charge: *state_v,
                    event,
                });
            }
        }
    };

    let push_sample = |w: &mut Option<&mut Vec<TracePoint>>, v_at_sample: f64| {
        if let Some(w) = w.as_deref_mut() {
            w.push(TracePoint {
                time: sample_time,
                v_charge: v_at_sample,
                event: TraceEvent::Sample,
            });
        }
    };
    let v_at_sample = if sample_time <= p.charge_window {
        // Sample falls inside the data window (non-default timing).
        advance_to(&mut t, &mut v, &mut pulses, sample_time, &mut waveform);
        let captured = v;
        push_sample(&mut waveform, captured);
        advance_to(&mut t, &mut v, &mut pulses, p.charge_window, &mut waveform);
        captured
    } else {
        advance_to(&mut t, &mut v, &mut pulses, p.charge_window, &mut waveform);
        // Plateau: the current is gated off, the voltage holds.
        push_sample(&mut waveform, v);
        v
    };

    if let Some(w) = waveform {
        w.push(TracePoint {
            time: p.grc_period(),
            v_charge: 0.0,
            event: TraceEvent::GlobalReset,
        });
    }

    let sampled = if p.comparator_noise_sigma > 0.0 {
        let noise = Normal::new(0.0, p.comparator_noise_sigma)
            .expect("validated sigma")
            .sample(rng);
        v_at_sample + noise
    } else {
        v_at_sample
    };
    let comparator_bit = sampled > p.v_ref;
    PcspcTrace {
        ramp_pulse_count: pulses,
        v_charge_at_sample: v_at_sample,
        comparator_bit,
        xor_out: !comparator_bit,
    }
}

/// Simulates one readout of a row held at constant current `i_mc` (amps).
pub fn simulate_readout(i_mc: f64, p: &PcspcParams, rng: &mut impl Rng) -> PcspcTrace {
    integrate(i_mc, p, rng, None)
}

/// Same as [`simulate_readout`] but also returns the sampled waveform.
pub fn simulate_readout_traced(
    i_mc: f64,
    p: &PcspcParams,
    rng: &mut impl Rng,
) -> (PcspcTrace, Vec<TracePoint>) {
    let mut waveform = Vec::with_capacity(1100);
    let trace = integrate(i_mc, p, rng, Some(&mut waveform));
    (trace, waveform)
}

/// Equivalent ADC resolution of a readout that distinguishes `levels`
/// discrete current levels.
pub fn effective_resolution(levels: usize) -> f64 {
    assert!(levels >= 2, "resolution needs at least 2 levels");
    (levels as f64).log2()
}
