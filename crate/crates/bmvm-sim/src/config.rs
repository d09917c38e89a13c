//! Run configuration: a single TOML file, every key optional, defaults
//! matching the reference hardware. CLI flags override file values.

use crate::array::{MarginOptions, SubArrayConfig};
use crate::cell::{CellParams, CellVariant};
use crate::device::ResistanceModel;
use crate::error::SimError;
use crate::pcspc::{calibrate_params, PcspcParams};
use crate::perf::PerfParams;
use crate::system::{ProtocolParams, SystemConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_VERSION: u32 = 1;

/// Comparator noise fitted against the default device model so that the
/// 9-bit BER lands near the reference point (see
/// `system::calibrate_comparator_noise`). Used by `ber-sweep` unless
/// overridden.
pub const CALIBRATED_COMPARATOR_NOISE_SIGMA: f64 = 0.0257;

fn default_version() -> u32 {
    CONFIG_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default = "default_version")]
    pub config_version: u32,
    pub run: RunSection,
    pub system: SystemSection,
    pub subarray: SubArraySection,
    pub device: DeviceSection,
    pub cell: CellSection,
    pub pcspc: PcspcSection,
    pub verify: VerifySection,
    pub margins: MarginsSection,
    pub ber: BerSection,
    pub protocol: ProtocolSection,
    pub perf: PerfSection,
    pub trace: TraceSection,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            config_version: CONFIG_VERSION,
            run: RunSection::default(),
            system: SystemSection::default(),
            subarray: SubArraySection::default(),
            device: DeviceSection::default(),
            cell: CellSection::default(),
            pcspc: PcspcSection::default(),
            verify: VerifySection::default(),
            margins: MarginsSection::default(),
            ber: BerSection::default(),
            protocol: ProtocolSection::default(),
            perf: PerfSection::default(),
            trace: TraceSection::default(),
        }
    }
}

impl FileConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let cfg: FileConfig =
            toml::from_str(text).map_err(|e| SimError::invalid(format!("config: {e}")))?;
        if cfg.config_version != CONFIG_VERSION {
            return Err(SimError::invalid(format!(
                "config: unsupported config_version {} (expected {CONFIG_VERSION})",
                cfg.config_version
            )));
        }
        Ok(cfg)
    }

    /// Builds validated runtime structures from the file values.
    pub fn resolve(&self) -> Result<Resolved, SimError> {
        let device = ResistanceModel {
            lrs_mean: self.device.lrs_mean_ohms,
            lrs_sigma: self.device.lrs_sigma_ohms,
            lrs_floor: self.device.lrs_floor_ohms,
            hrs_mean: self.device.hrs_mean_ohms,
            hrs_sigma: self.device.hrs_sigma_ohms,
            hrs_floor: self.device.hrs_floor_ohms,
            yield_fault_prob: self.device.yield_fault_prob,
            read_noise_sigma: self.device.read_noise_sigma,
        };
        let cell = CellParams {
            i_unit: self.cell.i_unit_amps,
            v_read: self.cell.i_unit_amps * self.cell.r_lrs_nominal_ohms,
            r_lrs_nominal: self.cell.r_lrs_nominal_ohms,
            r_hrs_nominal: self.cell.r_hrs_nominal_ohms,
            target_r_ratio_compensated: self.cell.target_r_ratio_compensated,
            target_r_ratio_baseline: self.cell.target_r_ratio_baseline,
            compensation_bias_current: self.cell.compensation_bias_current_amps,
            stuck_current: self
                .cell
                .stuck_current_amps
                .unwrap_or(self.cell.i_unit_amps),
        };
        let mut pcspc = calibrate_params(
            cell.i_unit,
            self.pcspc.grc_frequency_hz,
            self.pcspc.v_th_volts,
        );
        pcspc.t_d = self.pcspc.t_d_seconds;
        pcspc.hold_time = self.pcspc.hold_time_seconds;
        pcspc.comparator_noise_sigma = self.pcspc.comparator_noise_sigma_volts;
        if let Some(v) = self.pcspc.establish_charge_volts {
            pcspc.establish_charge = v;
        }
        if let Some(v) = self.pcspc.v_ref_volts {
            pcspc.v_ref = v;
        }
        if let Some(v) = self.pcspc.c1_farads {
            pcspc.c1 = v;
        }
        if let Some(v) = self.pcspc.time_step_seconds {
            pcspc.time_step = v;
        }

        let system = SystemConfig {
            subarray_count: self.system.subarray_count,
            subarray: SubArrayConfig {
                rows: self.subarray.rows,
                compute_cols: self.subarray.compute_cols,
                redundant_cols: self.subarray.redundant_cols,
            },
            device,
            cell,
            variant: self.cell.variant,
            pcspc,
            master_seed: self.run.master_seed,
        };
        system.validate()?;

        let margins = MarginOptions {
            trials_per_scenario: self.margins.trials_per_scenario,
            max_units: system.subarray.max_macv(),
            input_density: self.margins.input_density,
            weight_density: self.margins.weight_density,
            master_seed: system.master_seed,
            jobs: self.run.jobs,
        };

        let protocol = ProtocolParams {
            feature_len: self.protocol.feature_len,
            key_len: self.protocol.key_len,
            intra_class_flip_rate: self.protocol.intra_class_flip_rate,
            inter_class_flip_rate: self.protocol.inter_class_flip_rate,
            accept_threshold: self.protocol.accept_threshold,
            genuine_trials: self.protocol.genuine_trials,
            impostor_trials: self.protocol.impostor_trials,
        };

        let perf = PerfParams {
            rows: self.perf.rows.unwrap_or(system.subarray.rows),
            input_width: self.perf.input_width.unwrap_or(system.input_width()),
            frequency: self
                .perf
                .frequency_hz
                .unwrap_or(self.pcspc.grc_frequency_hz),
            total_power: self.perf.total_power_watts,
            pcspc_power_per_row: self.perf.pcspc_power_per_row_watts,
            ops_per_mac: self.perf.ops_per_mac,
        };

        Ok(Resolved {
            system,
            jobs: self.run.jobs,
            out: self.run.out.clone().filter(|s| !s.is_empty()),
            format: self.run.format.clone(),
            timestamp: self.run.timestamp,
            verify_instances: self.verify.instances,
            verify_matrix: self.verify.matrix.clone(),
            verify_input: self.verify.input.clone(),
            margins,
            ber_trials: self.ber.trials,
            ber_compute_bits: self.ber.compute_bits.clone(),
            ber_noise_sigma: self.ber.noise_sigma_volts,
            ber_input_density: self.ber.input_density,
            ber_weight_density: self.ber.weight_density,
            ber_calibrate: self.ber.calibrate,
            ber_target: self.ber.target_ber,
            protocol_ber: self.protocol.ber,
            protocol,
            perf,
            trace_hamming_weight: self.trace.hamming_weight,
            trace_current: self.trace.current_amps,
            trace_row: self.trace.row,
            trace_matrix: self.trace.matrix.clone(),
            trace_input: self.trace.input.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub master_seed: u64,
    /// Worker threads; 0 = library default. Execution detail only, never
    /// affects results.
    pub jobs: usize,
    /// Report destination; empty means stdout.
    pub out: Option<String>,
    /// Report format: "json" or "csv".
    pub format: String,
    /// Include the wall-clock timestamp in reports.
    pub timestamp: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            master_seed: 1,
            jobs: 0,
            out: None,
            format: "json".to_string(),
            timestamp: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub subarray_count: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { subarray_count: 4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubArraySection {
    pub rows: usize,
    pub compute_cols: usize,
    pub redundant_cols: usize,
}

impl Default for SubArraySection {
    fn default() -> Self {
        let d = SubArrayConfig::default();
        Self {
            rows: d.rows,
            compute_cols: d.compute_cols,
            redundant_cols: d.redundant_cols,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    pub lrs_mean_ohms: f64,
    pub lrs_sigma_ohms: f64,
    pub lrs_floor_ohms: f64,
    pub hrs_mean_ohms: f64,
    pub hrs_sigma_ohms: f64,
    pub hrs_floor_ohms: f64,
    pub yield_fault_prob: f64,
    pub read_noise_sigma: f64,
}

impl Default for DeviceSection {
    fn default() -> Self {
        let d = ResistanceModel::default();
        Self {
            lrs_mean_ohms: d.lrs_mean,
            lrs_sigma_ohms: d.lrs_sigma,
            lrs_floor_ohms: d.lrs_floor,
            hrs_mean_ohms: d.hrs_mean,
            hrs_sigma_ohms: d.hrs_sigma,
            hrs_floor_ohms: d.hrs_floor,
            yield_fault_prob: d.yield_fault_prob,
            read_noise_sigma: d.read_noise_sigma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub i_unit_amps: f64,
    pub r_lrs_nominal_ohms: f64,
    pub r_hrs_nominal_ohms: f64,
    pub target_r_ratio_compensated: f64,
    pub target_r_ratio_baseline: f64,
    pub compensation_bias_current_amps: f64,
    pub stuck_current_amps: Option<f64>,
    pub variant: CellVariant,
}

impl Default for CellSection {
    fn default() -> Self {
        let c = CellParams::default();
        Self {
            i_unit_amps: c.i_unit,
            r_lrs_nominal_ohms: c.r_lrs_nominal,
            r_hrs_nominal_ohms: c.r_hrs_nominal,
            target_r_ratio_compensated: c.target_r_ratio_compensated,
            target_r_ratio_baseline: c.target_r_ratio_baseline,
            compensation_bias_current_amps: c.compensation_bias_current,
            stuck_current_amps: None,
            variant: CellVariant::Compensated,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcspcSection {
    pub v_th_volts: f64,
    pub grc_frequency_hz: f64,
    pub t_d_seconds: f64,
    pub hold_time_seconds: f64,
    pub comparator_noise_sigma_volts: f64,
    pub establish_charge_volts: Option<f64>,
    pub v_ref_volts: Option<f64>,
    pub c1_farads: Option<f64>,
    pub time_step_seconds: Option<f64>,
}

impl Default for PcspcSection {
    fn default() -> Self {
        let p = PcspcParams::default();
        Self {
            v_th_volts: p.v_th,
            grc_frequency_hz: 1.0 / p.charge_window,
            t_d_seconds: p.t_d,
            hold_time_seconds: p.hold_time,
            comparator_noise_sigma_volts: 0.0,
            establish_charge_volts: None,
            v_ref_volts: None,
            c1_farads: None,
            time_step_seconds: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub instances: usize,
    /// Verify this BMV1 matrix/input pair instead of random instances.
    pub matrix: Option<String>,
    pub input: Option<String>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            instances: 20,
            matrix: None,
            input: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginsSection {
    pub trials_per_scenario: usize,
    pub input_density: f64,
    pub weight_density: f64,
}

impl Default for MarginsSection {
    fn default() -> Self {
        let d = MarginOptions::default();
        Self {
            trials_per_scenario: d.trials_per_scenario,
            input_density: d.input_density,
            weight_density: d.weight_density,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerSection {
    pub trials: u64,
    pub compute_bits: Vec<usize>,
    /// Comparator noise used for BER experiments. The default is the fitted
    /// calibration value; the physical-readout sections stay noise-free.
    pub noise_sigma_volts: f64,
    pub input_density: f64,
    pub weight_density: f64,
    /// Re-fit the noise to `target_ber` before sweeping.
    pub calibrate: bool,
    pub target_ber: f64,
}

impl Default for BerSection {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            compute_bits: vec![3, 5, 7, 9, 11],
            noise_sigma_volts: CALIBRATED_COMPARATOR_NOISE_SIGMA,
            input_density: 0.5,
            weight_density: 0.5,
            calibrate: false,
            target_ber: 1.6e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    /// Injected hardware bit error rate.
    pub ber: f64,
    pub feature_len: usize,
    pub key_len: usize,
    pub intra_class_flip_rate: f64,
    pub inter_class_flip_rate: f64,
    pub accept_threshold: u32,
    pub genuine_trials: u64,
    pub impostor_trials: u64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = ProtocolParams::default();
        Self {
            ber: 1.6e-5,
            feature_len: p.feature_len,
            key_len: p.key_len,
            intra_class_flip_rate: p.intra_class_flip_rate,
            inter_class_flip_rate: p.inter_class_flip_rate,
            accept_threshold: p.accept_threshold,
            genuine_trials: p.genuine_trials,
            impostor_trials: p.impostor_trials,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerfSection {
    pub total_power_watts: f64,
    pub pcspc_power_per_row_watts: f64,
    pub ops_per_mac: f64,
    /// Default: the configured sub-array row count.
    pub rows: Option<usize>,
    /// Default: the configured total input width.
    pub input_width: Option<usize>,
    /// Default: the configured GRC frequency.
    pub frequency_hz: Option<f64>,
}

impl Default for PerfSection {
    fn default() -> Self {
        let p = PerfParams::default();
        Self {
            total_power_watts: p.total_power,
            pcspc_power_per_row_watts: p.pcspc_power_per_row,
            ops_per_mac: p.ops_per_mac,
            rows: None,
            input_width: None,
            frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    pub hamming_weight: u32,
    /// Explicit row current (amps); overrides `hamming_weight`.
    pub current_amps: Option<f64>,
    /// Trace this row of a deployed task (needs `matrix` and `input`).
    pub row: Option<usize>,
    pub matrix: Option<String>,
    pub input: Option<String>,
}

impl Default for TraceSection {
    fn default() -> Self {
        Self {
            hamming_weight: 7,
            current_amps: None,
            row: None,
            matrix: None,
            input: None,
        }
    }
}

/// Validated runtime configuration, ready for the experiment drivers.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub system: SystemConfig,
    pub jobs: usize,
    pub out: Option<String>,
    pub format: String,
    pub timestamp: bool,
    pub verify_instances: usize,
    pub verify_matrix: Option<String>,
    pub verify_input: Option<String>,
    pub margins: MarginOptions,
    pub ber_trials: u64,
    pub ber_compute_bits: Vec<usize>,
    pub ber_noise_sigma: f64,
    pub ber_input_density: f64,
    pub ber_weight_density: f64,
    pub ber_calibrate: bool,
    pub ber_target: f64,
    pub protocol: ProtocolParams,
    pub protocol_ber: f64,
    pub perf: PerfParams,
    pub trace_hamming_weight: u32,
    pub trace_current: Option<f64>,
    pub trace_row: Option<usize>,
    pub trace_matrix: Option<String>,
    pub trace_input: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_defaults() {
        let cfg = FileConfig::parse("").unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.system.subarray_count, 4);
        assert_eq!(r.system.subarray.rows, 512);
        assert_eq!(r.system.input_width(), 36);
        assert!((r.system.pcspc.c1 - 0.25e-12).abs() < 1e-20);
        assert_eq!(r.system.pcspc.comparator_noise_sigma, 0.0);
        assert!(r.ber_noise_sigma > 0.0);
    }

    #[test]
    fn overrides_apply() {
        let text = r#"
            config_version = 1

            [run]
            master_seed = 99

            [device]
            lrs_sigma_ohms = 0.0
            hrs_sigma_ohms = 0.0

            [cell]
            variant = "baseline-1t1r"

            [pcspc]
            comparator_noise_sigma_volts = 0.05
        "#;
        let r = FileConfig::parse(text).unwrap().resolve().unwrap();
        assert_eq!(r.system.master_seed, 99);
        assert_eq!(r.system.device.lrs_sigma, 0.0);
        assert_eq!(r.system.pcspc.comparator_noise_sigma, 0.05);
        assert_eq!(r.system.variant, crate::cell::CellVariant::Baseline1T1R);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(FileConfig::parse("[device]\nlrs_typo_ohms = 1.0\n").is_err());
    }

    #[test]
    fn wrong_version_rejected() {
        assert!(FileConfig::parse("config_version = 2\n").is_err());
    }

    #[test]
    fn invalid_physics_rejected_at_resolve() {
        let text = "[device]\nhrs_floor_ohms = 100.0\n"; // below lrs_mean
        let cfg = FileConfig::parse(text).unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let cfg = FileConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = FileConfig::parse(&text).unwrap();
        assert_eq!(
            serde_json::to_string(&cfg).unwrap(),
            serde_json::to_string(&back).unwrap()
        );
    }
}
