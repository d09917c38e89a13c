//! Throughput, power, and energy-efficiency accounting.
//!
//! Conventions: one output bit per row per cycle, and one operation per MAC
//! bit processed (each input bit contributes one AND plus its XOR merge).
//! The op-counting convention is validated, not assumed: the same formula
//! must reproduce both the proposed platform's efficiency and the FPGA
//! reference from its published throughput and power.

use serde::{Deserialize, Serialize};

/// Inputs to the performance model. SI units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerfParams {
    pub rows: usize,
    pub input_width: usize,
    pub frequency: f64,
    pub total_power: f64,
    pub pcspc_power_per_row: f64,
    /// Operations counted per MAC bit processed.
    pub ops_per_mac: f64,
}

impl Default for PerfParams {
    fn default() -> Self {
        Self {
            rows: 512,
            input_width: 36,
            frequency: 40.0e6,
            total_power: 0.487,
            pcspc_power_per_row: 0.097e-3,
            ops_per_mac: 1.0,
        }
    }
}

/// Published figures of the FPGA platform used as the comparison baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FpgaReference {
    pub throughput_bits_per_sec: f64,
    /// MAC operations behind each output bit (the task's input width).
    pub ops_per_output_bit: f64,
    pub power: f64,
}

impl Default for FpgaReference {
    fn default() -> Self {
        Self {
            throughput_bits_per_sec: 51.20e9,
            ops_per_output_bit: 36.0,
            power: 1.975,
        }
    }
}

impl FpgaReference {
    pub fn energy_efficiency_tops_per_watt(&self) -> f64 {
        self.throughput_bits_per_sec * self.ops_per_output_bit / self.power / 1.0e12
    }
}

/// Output bits per second: one bit per row per cycle.
pub fn throughput_bits_per_sec(p: &PerfParams) -> f64 {
    p.rows as f64 * p.frequency
}

/// TOPS per watt of the array: every (row, input bit) pair is one MAC per
/// cycle.
pub fn energy_efficiency_tops_per_watt(p: &PerfParams) -> f64 {
    p.rows as f64 * p.input_width as f64 * p.ops_per_mac * p.frequency / p.total_power / 1.0e12
}

/// Total readout power across rows (watts).
pub fn readout_power_budget(rows: usize, pcspc_power_per_row: f64) -> f64 {
    rows as f64 * pcspc_power_per_row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput_matches_published_value() {
        let t = throughput_bits_per_sec(&PerfParams::default());
        assert!((t - 20.48e9).abs() / 20.48e9 < 1e-12);
    }

    #[test]
    fn throughput_trivial_cases() {
        let p = PerfParams {
            rows: 1,
            frequency: 1.0,
            ..PerfParams::default()
        };
        assert_eq!(throughput_bits_per_sec(&p), 1.0);
        let p = PerfParams {
            rows: 256,
            ..PerfParams::default()
        };
        assert!((throughput_bits_per_sec(&p) - 10.24e9).abs() < 1.0);
    }

    #[test]
    fn efficiency_matches_published_value() {
        let e = energy_efficiency_tops_per_watt(&PerfParams::default());
        assert!((e - 1.51).abs() / 1.51 < 0.01, "efficiency {e}");
    }

    #[test]
    fn fpga_reference_validates_the_op_convention() {
        let e = FpgaReference::default().energy_efficiency_tops_per_watt();
        assert!((e - 0.93).abs() / 0.93 < 0.01, "fpga efficiency {e}");
    }

    #[test]
    fn improvement_ratio_is_roughly_1_62() {
        let ours = energy_efficiency_tops_per_watt(&PerfParams::default());
        let fpga = FpgaReference::default().energy_efficiency_tops_per_watt();
        let ratio = ours / fpga;
        assert!((ratio - 1.62).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn readout_budget() {
        let w = readout_power_budget(512, 0.097e-3);
        assert!((w - 49.664e-3).abs() < 1e-9);
        assert_eq!(readout_power_budget(0, 0.097e-3), 0.0);
        assert!((readout_power_budget(1, 0.097e-3) - 0.097e-3).abs() < 1e-15);
        // Roughly a tenth of the platform power.
        let share = w / PerfParams::default().total_power;
        assert!((share - 0.102).abs() < 0.005, "share {share}");
    }

    #[test]
    fn linear_scaling() {
        let base = PerfParams::default();
        let double_rows = PerfParams {
            rows: base.rows * 2,
            ..base.clone()
        };
        let double_freq = PerfParams {
            frequency: base.frequency * 2.0,
            ..base.clone()
        };
        assert!(
            (throughput_bits_per_sec(&double_rows) - 2.0 * throughput_bits_per_sec(&base)).abs()
                < 1.0
        );
        assert!(
            (energy_efficiency_tops_per_watt(&double_freq)
                - 2.0 * energy_efficiency_tops_per_watt(&base))
            .abs()
                < 1e-9
        );
    }
}
