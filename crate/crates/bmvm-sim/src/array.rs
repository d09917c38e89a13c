//! Sub-array organization: 512x12 AND units, redundancy steering, row
//! current accumulation, and MAC signal-margin analysis.
//!
//! Physical columns split into `compute_cols` data positions, spare
//! redundant positions, and one constant-bias column (the last). Two of the
//! three redundant columns are inactive; the input driver steers data away
//! from columns containing faulty devices by re-designating which columns
//! are inactive. Steering is deterministic: the lowest-indexed fault-free
//! columns become active, in index order.

use crate::bitlinalg::{BitMatrix, BitVector};
use crate::cell::{read_jittered, unit_current, CellParams, CellVariant};
use crate::device::{sample_resistance, DeviceFault, DeviceSample, ResState, ResistanceModel};
use crate::error::SimError;
use crate::par::{map_indexed, Jobs};
use crate::rng::{substream, Domain};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Geometry of one sub-array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubArrayConfig {
    pub rows: usize,
    /// Data columns carrying matrix bits (9).
    pub compute_cols: usize,
    /// Redundant columns (3): two inactive spares plus the constant-bias
    /// column.
    pub redundant_cols: usize,
}

impl Default for SubArrayConfig {
    fn default() -> Self {
        Self {
            rows: 512,
            compute_cols: 9,
            redundant_cols: 3,
        }
    }
}

impl SubArrayConfig {
    pub fn total_cols(&self) -> usize {
        self.compute_cols + self.redundant_cols
    }

    /// Physical index of the constant-bias column.
    pub fn bias_col(&self) -> usize {
        self.total_cols() - 1
    }

    /// Number of steerable spare columns.
    pub fn spare_slots(&self) -> usize {
        self.redundant_cols - 1
    }

    /// Maximum MAC value a row can take: every data bit plus the bias bit.
    pub fn max_macv(&self) -> usize {
        self.compute_cols + 1
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.rows == 0 || self.compute_cols == 0 {
            return Err(SimError::invalid(
                "sub-array: rows and compute_cols must be positive",
            ));
        }
        if self.redundant_cols < 1 {
            return Err(SimError::invalid(
                "sub-array: need at least the constant-bias redundant column",
            ));
        }
        Ok(())
    }
}

/// Outcome of redundancy steering: which physical column serves each logical
/// data position, which are parked, and where the bias column is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnAssignment {
    /// `active[j]` is the physical column holding logical data bit `j`.
    pub active: Vec<usize>,
    /// Inactive redundancy; contributes no current.
    pub inactive: Vec<usize>,
    /// Constant-bias column.
    pub bias: usize,
}

/// Steers data columns around faults. `faulty[c]` marks physical column `c`
/// as unusable; the bias column is not steerable.
pub fn select_columns(cfg: &SubArrayConfig, faulty: &[bool]) -> Result<ColumnAssignment, SimError> {
    assert_eq!(faulty.len(), cfg.total_cols(), "fault mask width");
    let bias = cfg.bias_col();
    let mut active = Vec::with_capacity(cfg.compute_cols);
    let mut inactive = Vec::new();
    for (c, &is_faulty) in faulty.iter().enumerate().take(bias) {
        if !is_faulty && active.len() < cfg.compute_cols {
            active.push(c);
        } else {
            inactive.push(c);
        }
    }
    if active.len() < cfg.compute_cols {
        let faulty_count = faulty[..bias].iter().filter(|&&f| f).count();
        return Err(SimError::TooManyFaultyColumns(
            faulty_count,
            cfg.spare_slots(),
        ));
    }
    Ok(ColumnAssignment {
        active,
        inactive,
        bias,
    })
}

/// A sub-array with weights programmed and devices sampled.
#[derive(Debug, Clone)]
pub struct DeployedSubArray {
    pub config: SubArrayConfig,
    pub assignment: ColumnAssignment,
    /// Row-major `rows x total_cols`; the device state is the programmed
    /// weight.
    devices: Vec<DeviceSample>,
}

impl DeployedSubArray {
    pub fn device(&self, row: usize, col: usize) -> &DeviceSample {
        &self.devices[row * self.config.total_cols() + col]
    }

    pub fn weight(&self, row: usize, col: usize) -> ResState {
        self.device(row, col).state
    }
}

fn deploy_inner(
    a_slice: &BitMatrix,
    cfg: &SubArrayConfig,
    model: &ResistanceModel,
    forced_faulty_cols: &[usize],
    rng: &mut impl Rng,
) -> Result<DeployedSubArray, SimError> {
    if a_slice.rows() != cfg.rows {
        return Err(SimError::Dimension {
            context: "sub-array slice rows",
            expected: cfg.rows,
            got: a_slice.rows(),
        });
    }
    if a_slice.cols() != cfg.compute_cols {
        return Err(SimError::Dimension {
            context: "sub-array slice cols",
            expected: cfg.compute_cols,
            got: a_slice.cols(),
        });
    }

    let total = cfg.total_cols();

    // Yield faults first (fixed draw order), then steering, then programming.
    let mut faults = vec![DeviceFault::None; cfg.rows * total];
    for (c, fault) in faults.iter_mut().enumerate() {
        let col = c % total;
        *fault = if forced_faulty_cols.contains(&col) {
            DeviceFault::Stuck
        } else {
            crate::device::sample_fault(model, rng)
        };
    }
    let mut faulty_col = vec![false; total];
    for row in 0..cfg.rows {
        for col in 0..total {
            if faults[row * total + col] == DeviceFault::Stuck && col != cfg.bias_col() {
                faulty_col[col] = true;
            }
        }
    }
    let assignment = select_columns(cfg, &faulty_col)?;

    let mut devices = Vec::with_capacity(cfg.rows * total);
    for row in 0..cfg.rows {
        for col in 0..total {
            // Weight for this physical position: data bit through the
            // steering map, constant 1 on the bias column, parked 0 on
            // inactive columns.
            let state = if col == assignment.bias {
                ResState::Lrs
            } else if let Some(j) = assignment.active.iter().position(|&c| c == col) {
                if a_slice.get(row, j) {
                    ResState::Lrs
                } else {
                    ResState::Hrs
                }
            } else {
                ResState::Hrs
            };
            let mut d = sample_resistance(model, state, rng);
            d.fault = faults[row * total + col];
            devices.push(d);
        }
    }

    Ok(DeployedSubArray {
        config: cfg.clone(),
        assignment,
        devices,
    })
}

/// Programs a `rows x compute_cols` bit slice into a sub-array:
/// bit 1 -> LRS, bit 0 -> HRS, with per-device fault sampling and
/// redundancy steering around faulty columns.
pub fn deploy(
    a_slice: &BitMatrix,
    cfg: &SubArrayConfig,
    model: &ResistanceModel,
    rng: &mut impl Rng,
) -> Result<DeployedSubArray, SimError> {
    deploy_inner(a_slice, cfg, model, &[], rng)
}

/// Fault-injection variant of [`deploy`]: every device in the listed
/// physical columns is stuck, on top of the model's sampled faults.
pub fn deploy_with_column_faults(
    a_slice: &BitMatrix,
    cfg: &SubArrayConfig,
    model: &ResistanceModel,
    faulty_cols: &[usize],
    rng: &mut impl Rng,
) -> Result<DeployedSubArray, SimError> {
    deploy_inner(a_slice, cfg, model, faulty_cols, rng)
}

/// Accumulated sourceline current of one row (amps): active data columns
/// gated by the input bits, plus the constant-bias column. Inactive columns
/// contribute nothing.
pub fn row_current(
    sub: &DeployedSubArray,
    row: usize,
    x_slice: &BitVector,
    cell: &CellParams,
    variant: CellVariant,
) -> f64 {
    assert!(row < sub.config.rows, "row {row} out of range");
    assert_eq!(
        x_slice.len(),
        sub.config.compute_cols,
        "input slice width mismatch"
    );
    let mut total = 0.0;
    for (j, &col) in sub.assignment.active.iter().enumerate() {
        let d = sub.device(row, col);
        total += unit_current(x_slice.get(j), d.state, d, cell, variant);
    }
    let bias = sub.device(row, sub.assignment.bias);
    total += unit_current(true, bias.state, bias, cell, variant);
    total
}

/// [`row_current`] with the optional per-read retention jitter applied to
/// every device.
pub fn row_current_jittered(
    sub: &DeployedSubArray,
    row: usize,
    x_slice: &BitVector,
    cell: &CellParams,
    variant: CellVariant,
    model: &ResistanceModel,
    rng: &mut impl Rng,
) -> f64 {
    if model.read_noise_sigma == 0.0 {
        return row_current(sub, row, x_slice, cell, variant);
    }
    assert!(row < sub.config.rows, "row {row} out of range");
    assert_eq!(x_slice.len(), sub.config.compute_cols);
    let mut total = 0.0;
    for (j, &col) in sub.assignment.active.iter().enumerate() {
        let d = read_jittered(sub.device(row, col), model, rng);
        total += unit_current(x_slice.get(j), d.state, &d, cell, variant);
    }
    let bias = read_jittered(sub.device(row, sub.assignment.bias), model, rng);
    total += unit_current(true, bias.state, &bias, cell, variant);
    total
}

/// Options for [`margin_analysis`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginOptions {
    pub trials_per_scenario: usize,
    /// Units participating in a row's MAC (data bits + bias bit).
    pub max_units: usize,
    /// Probability an input bit is 1 (scenario weighting only).
    pub input_density: f64,
    /// Probability a weight bit is 1 (scenario weighting only).
    pub weight_density: f64,
    pub master_seed: u64,
    pub jobs: Jobs,
}

impl Default for MarginOptions {
    fn default() -> Self {
        Self {
            trials_per_scenario: 100_000,
            max_units: SubArrayConfig::default().max_macv(),
            input_density: 0.5,
            weight_density: 0.5,
            master_seed: 0,
            jobs: 0,
        }
    }
}

/// Current statistics of one (MACV, leaking-cell-count) scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub macv: usize,
    /// Activated cells holding HRS weights (leakage contributors).
    pub leaking: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

/// Per-MACV envelope over all of its leakage scenarios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MacvEnvelope {
    pub macv: usize,
    pub env_min: f64,
    pub env_max: f64,
    /// Scenario-weighted mean/std under the configured input and weight
    /// densities.
    pub mean: f64,
    pub std: f64,
    pub scenarios: Vec<ScenarioStats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginReport {
    pub per_macv: Vec<MacvEnvelope>,
    /// `gaps[m] = env_min(m+1) - env_max(m)`.
    pub gaps: Vec<f64>,
    pub worst_gap: f64,
    pub non_overlapping: bool,
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Monte Carlo sweep of the accumulated current for every MAC value
/// `m in 0..=max_units` and every leakage scenario `k in 0..=max_units-m`
/// (`k` activated cells holding HRS weights).
pub fn margin_analysis(
    model: &ResistanceModel,
    cell: &CellParams,
    variant: CellVariant,
    opts: &MarginOptions,
) -> MarginReport {
    assert!(opts.trials_per_scenario > 0);
    let max = opts.max_units;
    let scenario_ids: Vec<(usize, usize)> = (0..=max)
        .flat_map(|m| (0..=max - m).map(move |k| (m, k)))
        .collect();

    let stats = map_indexed(opts.jobs, scenario_ids.len() as u64, |idx| {
        let (m, k) = scenario_ids[idx as usize];
        let mut rng = substream(opts.master_seed, Domain::MarginScenario, idx);
        let mut min = f64::INFINITY;
        let mut max_i = f64::NEG_INFINITY;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for t in 0..opts.trials_per_scenario {
            let mut i_mc = 0.0;
            for _ in 0..m {
                let d = sample_resistance(model, ResState::Lrs, &mut rng);
                i_mc += unit_current(true, ResState::Lrs, &d, cell, variant);
            }
            for _ in 0..k {
                let d = sample_resistance(model, ResState::Hrs, &mut rng);
                i_mc += unit_current(true, ResState::Hrs, &d, cell, variant);
            }
            min = min.min(i_mc);
            max_i = max_i.max(i_mc);
            let delta = i_mc - mean;
            mean += delta / (t + 1) as f64;
            m2 += delta * (i_mc - mean);
        }
        let var = m2 / opts.trials_per_scenario as f64;
        ScenarioStats {
            macv: m,
            leaking: k,
            min,
            max: max_i,
            mean,
            std: var.sqrt(),
        }
    });

    // Probability a non-conducting unit leaks: input 1, weight 0,
    // conditioned on not (input 1 and weight 1).
    let pd = opts.input_density;
    let pw = opts.weight_density;
    let q = if pd * pw < 1.0 {
        pd * (1.0 - pw) / (1.0 - pd * pw)
    } else {
        0.0
    };

    let mut per_macv = Vec::with_capacity(max + 1);
    for m in 0..=max {
        let scenarios: Vec<ScenarioStats> = stats.iter().filter(|s| s.macv == m).cloned().collect();
        let env_min = scenarios
            .iter()
            .map(|s| s.min)
            .fold(f64::INFINITY, f64::min);
        let env_max = scenarios
            .iter()
            .map(|s| s.max)
            .fold(f64::NEG_INFINITY, f64::max);
        let n_free = max - m;
        let weights: Vec<f64> = (0..=n_free).map(|k| binomial_pmf(n_free, k, q)).collect();
        let mean: f64 = scenarios
            .iter()
            .zip(&weights)
            .map(|(s, w)| w * s.mean)
            .sum();
        let second: f64 = scenarios
            .iter()
            .zip(&weights)
            .map(|(s, w)| w * (s.std * s.std + s.mean * s.mean))
            .sum();
        per_macv.push(MacvEnvelope {
            macv: m,
            env_min,
            env_max,
            mean,
            std: (second - mean * mean).max(0.0).sqrt(),
            scenarios,
        });
    }

    let gaps: Vec<f64> = (0..max)
        .map(|m| per_macv[m + 1].env_min - per_macv[m].env_max)
        .collect();
    let worst_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    MarginReport {
        non_overlapping: gaps.iter().all(|&g| g > 0.0),
        per_macv,
        gaps,
        worst_gap,
    }
}
