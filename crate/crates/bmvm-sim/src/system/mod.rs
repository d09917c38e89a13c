//! Full-pipeline simulation: tiling a 512x36 task across four sub-arrays,
//! per-row PCSPC readout, and the XOR tree merging the sub-array outputs.
//!
//! Input columns `[9s, 9s+9)` go to sub-array `s`. Each sub-array decodes
//! the parity of its own nine products (the PCSPC output is already
//! inverted for the bias column), so the XOR of the four outputs equals the
//! row's full 36-bit parity.
//!
//! Randomness is addressed by `(master_seed, domain, index)`: deployment
//! uses one stream per sub-array, readout one stream per row, Monte Carlo
//! one stream per trial. Reports are therefore identical for any `--jobs`.

mod ber;
mod protocol;

pub use ber::{calibrate_comparator_noise, estimate_ber, BerEstimate, BerOptions};
pub use protocol::{protocol_impact, ProtocolImpact, ProtocolParams};

use crate::array::{deploy, row_current_jittered, DeployedSubArray, SubArrayConfig};
use crate::bitlinalg::{BitMatrix, BitVector};
use crate::cell::{CellParams, CellVariant};
use crate::device::ResistanceModel;
use crate::error::SimError;
use crate::par::{map_indexed, Jobs};
use crate::pcspc::{simulate_readout, PcspcParams, PcspcTrace};
use crate::rng::{substream, Domain};
use serde::{Deserialize, Serialize};

/// Complete configuration of the simulated machine.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    pub subarray_count: usize,
    pub subarray: SubArrayConfig,
    pub device: ResistanceModel,
    pub cell: CellParams,
    pub variant: CellVariant,
    pub pcspc: PcspcParams,
    pub master_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            subarray_count: 4,
            subarray: SubArrayConfig::default(),
            device: ResistanceModel::default(),
            cell: CellParams::default(),
            variant: CellVariant::Compensated,
            pcspc: PcspcParams::default(),
            master_seed: 1,
        }
    }
}

impl SystemConfig {
    /// Zero device variance, zero comparator noise: the limit in which the
    /// pipeline must match the oracle bit for bit.
    pub fn ideal() -> Self {
        Self {
            device: ResistanceModel::ideal(),
            ..Self::default()
        }
    }

    /// Total input vector width served by all sub-arrays.
    pub fn input_width(&self) -> usize {
        self.subarray_count * self.subarray.compute_cols
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.subarray_count == 0 {
            return Err(SimError::invalid("subarray_count must be positive"));
        }
        self.subarray.validate()?;
        self.device.validate()?;
        self.cell.validate()?;
        self.pcspc.validate(self.cell.i_unit)?;
        Ok(())
    }
}

/// Splits the task matrix into per-sub-array column slices and deploys each.
/// Slice `s` takes columns `[s*compute_cols, (s+1)*compute_cols)`.
pub fn map_task(a: &BitMatrix, cfg: &SystemConfig) -> Result<Vec<DeployedSubArray>, SimError> {
    if a.cols() != cfg.input_width() {
        return Err(SimError::Dimension {
            context: "task matrix cols",
            expected: cfg.input_width(),
            got: a.cols(),
        });
    }
    if a.rows() != cfg.subarray.rows {
        return Err(SimError::Dimension {
            context: "task matrix rows",
            expected: cfg.subarray.rows,
            got: a.rows(),
        });
    }
    let cc = cfg.subarray.compute_cols;
    (0..cfg.subarray_count)
        .map(|s| {
            let slice = a.column_slice(s * cc, (s + 1) * cc);
            let mut rng = substream(cfg.master_seed, Domain::Deploy, s as u64);
            deploy(&slice, &cfg.subarray, &cfg.device, &mut rng)
        })
        .collect()
}

/// Merges the per-sub-array XOR outputs.
pub fn xor_tree(bits: &[bool]) -> bool {
    bits.iter().fold(false, |acc, &b| acc ^ b)
}

/// Per-row diagnostic record: the accumulated current and readout trace of
/// every sub-array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowDiagnostics {
    pub currents: Vec<f64>,
    pub traces: Vec<PcspcTrace>,
}

#[derive(Debug, Clone)]
pub struct BmvmOutcome {
    pub y_sim: BitVector,
    pub row_diagnostics: Option<Vec<RowDiagnostics>>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub jobs: Jobs,
    pub collect_diagnostics: bool,
}

/// Runs one BMVM on the simulated hardware.
pub fn run_bmvm(a: &BitMatrix, x: &BitVector, cfg: &SystemConfig) -> Result<BmvmOutcome, SimError> {
    run_bmvm_with(a, x, cfg, &RunOptions::default())
}

/// [`run_bmvm`] with explicit parallelism/diagnostic options.
pub fn run_bmvm_with(
    a: &BitMatrix,
    x: &BitVector,
    cfg: &SystemConfig,
    opts: &RunOptions,
) -> Result<BmvmOutcome, SimError> {
    if x.len() != cfg.input_width() {
        return Err(SimError::Dimension {
            context: "input vector width",
            expected: cfg.input_width(),
            got: x.len(),
        });
    }
    let subs = map_task(a, cfg)?;
    let cc = cfg.subarray.compute_cols;
    let x_slices: Vec<BitVector> = (0..cfg.subarray_count)
        .map(|s| x.slice(s * cc, (s + 1) * cc))
        .collect();

    let rows = cfg.subarray.rows;
    let evaluated = map_indexed(opts.jobs, rows as u64, |row| {
        let row = row as usize;
        let mut rng = substream(cfg.master_seed, Domain::Readout, row as u64);
        let mut bits = Vec::with_capacity(subs.len());
        let mut diag = opts.collect_diagnostics.then(|| RowDiagnostics {
            currents: Vec::with_capacity(subs.len()),
            traces: Vec::with_capacity(subs.len()),
        });
        for (sub, x_slice) in subs.iter().zip(&x_slices) {
            let i_mc = row_current_jittered(
                sub,
                row,
                x_slice,
                &cfg.cell,
                cfg.variant,
                &cfg.device,
                &mut rng,
            );
            let trace = simulate_readout(i_mc, &cfg.pcspc, &mut rng);
            bits.push(trace.xor_out);
            if let Some(d) = diag.as_mut() {
                d.currents.push(i_mc);
                d.traces.push(trace);
            }
        }
        (xor_tree(&bits), diag)
    });

    let mut y_sim = BitVector::zeros(rows);
    let mut diagnostics = opts.collect_diagnostics.then(Vec::new);
    for (row, (bit, diag)) in evaluated.into_iter().enumerate() {
        y_sim.set(row, bit);
        if let (Some(all), Some(d)) = (diagnostics.as_mut(), diag) {
            all.push(d);
        }
    }
    Ok(BmvmOutcome {
        y_sim,
        row_diagnostics: diagnostics,
    })
}
