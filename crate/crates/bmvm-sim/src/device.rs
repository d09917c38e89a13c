//! Stochastic RRAM device model.
//!
//! Resistances are drawn from truncated Gaussians, one per state. Truncation
//! is by rejection rather than clamping, so there is no probability atom at
//! the floor (the resulting upward bias of the mean is below 1e-3 relative
//! for the default parameters and is ignored). Yield faults are sampled
//! independently per device.
//!
//! Defaults: LRS ~ N(6 kΩ, 60 Ω) floored at 5 kΩ, giving < 2% total spread;
//! HRS ~ N(70 kΩ, 10 kΩ) floored at 40 kΩ, deliberately pessimistic so that
//! passing margins here implies margins on measured devices. Programming
//! variability is sampled once per deployed weight.

use crate::error::SimError;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Resistance state of a cell: LRS encodes weight 1, HRS encodes weight 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResState {
    Lrs,
    Hrs,
}

/// Yield fault status of a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DeviceFault {
    #[default]
    None,
    Stuck,
}

/// Truncated-Gaussian resistance parameters plus the per-device fault rate.
/// All resistances in ohms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResistanceModel {
    pub lrs_mean: f64,
    pub lrs_sigma: f64,
    pub lrs_floor: f64,
    pub hrs_mean: f64,
    pub hrs_sigma: f64,
    pub hrs_floor: f64,
    /// Probability that a device is stuck, independently per device.
    pub yield_fault_prob: f64,
    /// Optional multiplicative per-read resistance jitter (relative sigma).
    /// Models retention read fluctuation; off by default.
    pub read_noise_sigma: f64,
}

impl Default for ResistanceModel {
    fn default() -> Self {
        Self {
            lrs_mean: 6_000.0,
            lrs_sigma: 60.0,
            lrs_floor: 5_000.0,
            hrs_mean: 70_000.0,
            hrs_sigma: 10_000.0,
            hrs_floor: 40_000.0,
            yield_fault_prob: 0.0,
            read_noise_sigma: 0.0,
        }
    }
}

impl ResistanceModel {
    /// Degenerate model: both states exactly at their means, no faults,
    /// no read noise.
    pub fn ideal() -> Self {
        Self {
            lrs_sigma: 0.0,
            hrs_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let all = [
            ("lrs_mean", self.lrs_mean),
            ("lrs_sigma", self.lrs_sigma),
            ("lrs_floor", self.lrs_floor),
            ("hrs_mean", self.hrs_mean),
            ("hrs_sigma", self.hrs_sigma),
            ("hrs_floor", self.hrs_floor),
            ("yield_fault_prob", self.yield_fault_prob),
            ("read_noise_sigma", self.read_noise_sigma),
        ];
        for (name, v) in all {
            if !v.is_finite() || v < 0.0 {
                return Err(SimError::invalid(format!(
                    "device model: {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.lrs_mean <= 0.0 || self.hrs_mean <= 0.0 {
            return Err(SimError::invalid("device model: means must be positive"));
        }
        // Rejection sampling needs the floor at or below the mean to keep the
        // acceptance rate >= 1/2.
        if self.lrs_floor > self.lrs_mean || self.hrs_floor > self.hrs_mean {
            return Err(SimError::invalid(
                "device model: state floor must not exceed its mean",
            ));
        }
        if self.hrs_floor <= self.lrs_mean {
            return Err(SimError::invalid(
                "device model: hrs_floor must exceed lrs_mean",
            ));
        }
        if self.yield_fault_prob > 1.0 {
            return Err(SimError::invalid(
                "device model: yield_fault_prob must be <= 1",
            ));
        }
        Ok(())
    }

    fn state_params(&self, state: ResState) -> (f64, f64, f64) {
        match state {
            ResState::Lrs => (self.lrs_mean, self.lrs_sigma, self.lrs_floor),
            ResState::Hrs => (self.hrs_mean, self.hrs_sigma, self.hrs_floor),
        }
    }
}

/// One programmed device: its sampled resistance, state, and fault status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceSample {
    pub resistance: f64,
    pub state: ResState,
    pub fault: DeviceFault,
}

/// Draws a resistance for `state` from the truncated Gaussian.
pub fn sample_resistance(
    model: &ResistanceModel,
    state: ResState,
    rng: &mut impl Rng,
) -> DeviceSample {
    let (mean, sigma, floor) = model.state_params(state);
    let resistance = if sigma == 0.0 {
        mean
    } else {
        let dist = Normal::new(mean, sigma).expect("validated sigma");
        loop {
            let r = dist.sample(rng);
            if r >= floor {
                break r;
            }
        }
    };
    DeviceSample {
        resistance,
        state,
        fault: DeviceFault::None,
    }
}

/// Bernoulli yield-fault draw.
pub fn sample_fault(model: &ResistanceModel, rng: &mut impl Rng) -> DeviceFault {
    if model.yield_fault_prob > 0.0 && rng.random_bool(model.yield_fault_prob) {
        DeviceFault::Stuck
    } else {
        DeviceFault::None
    }
}

/// Resistance plus fault draw, as used during deployment.
pub fn sample_device(model: &ResistanceModel, state: ResState, rng: &mut impl Rng) -> DeviceSample {
    let mut sample = sample_resistance(model, state, rng);
    sample.fault = sample_fault(model, rng);
    sample
}
