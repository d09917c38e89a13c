//! Current transfer of a single AND operation unit.
//!
//! Two variants are modeled. The compensated cell biases its output branch
//! so that an HRS device drives the pass transistor into subthreshold,
//! dividing the leakage by a calibrated equivalent R-ratio (~51.9). The
//! plain 1T1R baseline leaks with the raw device ratio (~10.4). In both
//! variants an inactive input gates the cell off completely.
//!
//! The subthreshold transfer is not modeled at transistor level; leakage is
//! a divisive suppression calibrated to the population R-ratio targets,
//! with resistance variability still propagating into the current spread
//! (current is inversely proportional to the sampled resistance).

use crate::device::{DeviceFault, DeviceSample, ResState, ResistanceModel};
use crate::error::SimError;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Which AND-unit circuit to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellVariant {
    #[serde(rename = "compensated")]
    Compensated,
    #[serde(rename = "baseline-1t1r")]
    Baseline1T1R,
}

/// Electrical parameters of the AND unit. Currents in amps, resistances in
/// ohms, voltages in volts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellParams {
    /// Nominal LRS output current (4 µA).
    pub i_unit: f64,
    /// Nominal read bias across the cell; folded into the current
    /// calibration, kept for reporting.
    pub v_read: f64,
    /// Nominal LRS resistance the calibration assumes.
    pub r_lrs_nominal: f64,
    /// Nominal HRS resistance the leakage suppression is referenced to.
    pub r_hrs_nominal: f64,
    /// Population-average R-ratio target of the compensated cell.
    pub target_r_ratio_compensated: f64,
    /// Population-average R-ratio target of the plain 1T1R cell.
    pub target_r_ratio_baseline: f64,
    /// Constant current of the compensation branch (4 µA).
    pub compensation_bias_current: f64,
    /// Current returned by a stuck device when activated. Defaults to the
    /// nominal LRS current, the worst case for parity.
    pub stuck_current: f64,
}

impl Default for CellParams {
    fn default() -> Self {
        let i_unit = 4.0e-6;
        Self {
            i_unit,
            v_read: i_unit * 6_000.0,
            r_lrs_nominal: 6_000.0,
            r_hrs_nominal: 70_000.0,
            target_r_ratio_compensated: 51.9,
            target_r_ratio_baseline: 51.9 / 5.0,
            compensation_bias_current: 4.0e-6,
            stuck_current: i_unit,
        }
    }
}

impl CellParams {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [
            ("i_unit", self.i_unit),
            ("r_lrs_nominal", self.r_lrs_nominal),
            ("r_hrs_nominal", self.r_hrs_nominal),
            ("compensation_bias_current", self.compensation_bias_current),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(SimError::invalid(format!(
                    "cell params: {name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(self.target_r_ratio_compensated > self.target_r_ratio_baseline
            && self.target_r_ratio_baseline > 1.0)
        {
            return Err(SimError::invalid(
                "cell params: require target_r_ratio_compensated > target_r_ratio_baseline > 1",
            ));
        }
        if !self.stuck_current.is_finite() || self.stuck_current < 0.0 {
            return Err(SimError::invalid("cell params: bad stuck_current"));
        }
        Ok(())
    }

    pub fn target_r_ratio(&self, variant: CellVariant) -> f64 {
        match variant {
            CellVariant::Compensated => self.target_r_ratio_compensated,
            CellVariant::Baseline1T1R => self.target_r_ratio_baseline,
        }
    }
}

/// Output current of one AND unit, in amps.
///
/// An input of 0 gates the cell off (zero current regardless of device
/// state). With input 1, an LRS device sources `i_unit` scaled by its
/// resistance deviation from nominal; an HRS device leaks its nominal-
/// referenced current divided by the variant's R-ratio. Stuck devices
/// source the configured stuck current whenever activated.
pub fn unit_current(
    input_bit: bool,
    weight: ResState,
    device: &DeviceSample,
    p: &CellParams,
    variant: CellVariant,
) -> f64 {
    debug_assert_eq!(device.state, weight, "device sampled for the wrong state");
    if !input_bit {
        return 0.0;
    }
    if device.fault == DeviceFault::Stuck {
        return p.stuck_current;
    }
    match weight {
        ResState::Lrs => p.i_unit * p.r_lrs_nominal / device.resistance,
        ResState::Hrs => {
            p.i_unit * (p.r_hrs_nominal / device.resistance) / p.target_r_ratio(variant)
        }
    }
}

/// Applies the optional per-read retention jitter to a device's resistance.
pub fn read_jittered(
    device: &DeviceSample,
    model: &ResistanceModel,
    rng: &mut impl Rng,
) -> DeviceSample {
    if model.read_noise_sigma == 0.0 {
        return *device;
    }
    let jitter: f64 = Normal::new(0.0, model.read_noise_sigma)
        .expect("validated sigma")
        .sample(rng);
    DeviceSample {
        resistance: (device.resistance * (1.0 + jitter)).max(1.0),
        ..*device
    }
}

/// Monte Carlo estimate of the population R-ratio,
/// `mean(I_LRS) / mean(I_HRS)` over activated cells.
pub fn effective_r_ratio(
    variant: CellVariant,
    p: &CellParams,
    model: &ResistanceModel,
    trials: usize,
    rng: &mut impl Rng,
) -> f64 {
    assert!(trials > 0);
    let mut sum_lrs = 0.0;
    let mut sum_hrs = 0.0;
    for _ in 0..trials {
        let lrs = crate::device::sample_resistance(model, ResState::Lrs, rng);
        let hrs = crate::device::sample_resistance(model, ResState::Hrs, rng);
        sum_lrs += unit_current(true, ResState::Lrs, &lrs, p, variant);
        sum_hrs += unit_current(true, ResState::Hrs, &hrs, p, variant);
    }
    sum_lrs / sum_hrs
}
