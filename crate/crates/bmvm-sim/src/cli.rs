//! Command-line front end.
//!
//! Experiments: `verify`, `margins`, `ber-sweep`, `perf`, `protocol`,
//! `trace`. Configuration comes from a TOML file (`--config`); every flag
//! overrides its file counterpart. Human-readable progress goes to stderr;
//! the report body (JSON or CSV) goes to stdout or `--out`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 I/O error.

use crate::array::margin_analysis;
use crate::bitlinalg::{bmvm_exact, load_matrix, load_vector, BitMatrix, BitVector};
use crate::config::{FileConfig, Resolved};
use crate::device::ResistanceModel;
use crate::pcspc::{simulate_readout_traced, TracePoint};
use crate::perf::{
    energy_efficiency_tops_per_watt, readout_power_budget, throughput_bits_per_sec, FpgaReference,
};
use crate::report::SimReport;
use crate::rng::{substream, Domain};
use crate::system::{
    calibrate_comparator_noise, estimate_ber, map_task, protocol_impact, run_bmvm_with, BerOptions,
    RunOptions,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_IO_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "bmvm-sim",
    version,
    about = "Behavioral simulator of an RRAM compute-in-memory BMVM accelerator"
)]
pub struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Trial-count override (instances / trials per scenario / Monte Carlo
    /// trials, depending on the experiment).
    #[arg(long, global = true)]
    pub trials: Option<u64>,

    /// Worker threads (0 = default). Never changes results.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report format (default: json, or the config `run.format`).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Omit the timestamp so reports can be compared byte for byte.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the pipeline against the GF(2) oracle (zero device variance),
    /// including an exhaustive single-row decode.
    Verify {
        /// Task matrix in BMV1 format (with --input: verify this instance).
        #[arg(long, requires = "input")]
        matrix: Option<PathBuf>,
        /// Input vector in BMV1 format (1-row matrix).
        #[arg(long, requires = "matrix")]
        input: Option<PathBuf>,
        /// Number of random instances.
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Monte Carlo sweep of per-MACV current envelopes and margins.
    Margins,
    /// BER vs compute-bit-count sweep.
    BerSweep {
        /// Comma-separated compute-bit counts.
        #[arg(long, value_delimiter = ',')]
        compute_bits: Option<Vec<usize>>,
        /// Comparator noise sigma (volts) for the sweep.
        #[arg(long)]
        noise_sigma: Option<f64>,
        /// Fit the comparator noise to the target BER before sweeping.
        #[arg(long)]
        calibrate: bool,
        /// Target BER for --calibrate.
        #[arg(long)]
        target_ber: Option<f64>,
    },
    /// Throughput / power / energy-efficiency figures.
    Perf,
    /// Synthetic authentication-protocol impact of the hardware BER.
    Protocol {
        /// Injected bit error rate.
        #[arg(long)]
        ber: Option<f64>,
    },
    /// Dump a PCSPC waveform.
    Trace {
        /// Ideal Hamming weight to trace (current = weight x i_unit).
        #[arg(long)]
        hamming_weight: Option<u32>,
        /// Explicit row current in amps (overrides --hamming-weight).
        #[arg(long)]
        current: Option<f64>,
        /// Trace a deployed row of a task instead (needs --matrix/--input).
        #[arg(long, requires = "matrix")]
        trace_row: Option<usize>,
        #[arg(long, requires = "input")]
        matrix: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG_ERROR,
            Failure::Io(_) => EXIT_IO_ERROR,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("configuration error: {e}"))
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("i/o error: {e}"))
}

/// Entry point used by `main`; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.message());
            f.code()
        }
    }
}

/// Output routing resolved from flags and config (flags win).
struct Output {
    out: Option<PathBuf>,
    format: Format,
    timestamp: bool,
}

impl Output {
    fn merge(cli: &Cli, resolved: &Resolved) -> Result<Self, Failure> {
        let format = match cli.format {
            Some(f) => f,
            None => match resolved.format.as_str() {
                "json" => Format::Json,
                "csv" => Format::Csv,
                other => {
                    return Err(config_err(format!(
                        "run.format must be \"json\" or \"csv\", got {other:?}"
                    )))
                }
            },
        };
        Ok(Self {
            out: cli
                .out
                .clone()
                .or_else(|| resolved.out.as_ref().map(PathBuf::from)),
            format,
            timestamp: !cli.no_timestamp && resolved.timestamp,
        })
    }

    fn emit(&self, body: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, body).map_err(io_err),
            None => {
                println!("{body}");
                Ok(())
            }
        }
    }

    fn emit_report(&self, report: &SimReport, csv: &str) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.emit(&report.to_json_pretty()),
            Format::Csv => self.emit(csv),
        }
    }
}

fn run_inner(cli: Cli) -> Result<i32, Failure> {
    let mut file_cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err)?;
            FileConfig::parse(&text).map_err(config_err)?
        }
        None => FileConfig::default(),
    };
    if let Some(seed) = cli.seed {
        file_cfg.run.master_seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        file_cfg.run.jobs = jobs;
    }
    let resolved = file_cfg.resolve().map_err(config_err)?;
    let output = Output::merge(&cli, &resolved)?;

    match &cli.command {
        Command::Verify {
            matrix,
            input,
            instances,
        } => {
            let matrix = matrix
                .clone()
                .or_else(|| resolved.verify_matrix.as_ref().map(PathBuf::from));
            let input = input
                .clone()
                .or_else(|| resolved.verify_input.as_ref().map(PathBuf::from));
            cmd_verify(&cli, &resolved, &output, matrix, input, *instances)
        }
        Command::Margins => cmd_margins(&cli, &resolved, &output),
        Command::BerSweep {
            compute_bits,
            noise_sigma,
            calibrate,
            target_ber,
        } => cmd_ber_sweep(
            &cli,
            &resolved,
            &output,
            compute_bits.clone(),
            *noise_sigma,
            *calibrate || resolved.ber_calibrate,
            target_ber.unwrap_or(resolved.ber_target),
        ),
        Command::Perf => cmd_perf(&resolved, &output),
        Command::Protocol { ber } => cmd_protocol(&cli, &resolved, &output, *ber),
        Command::Trace {
            hamming_weight,
            current,
            trace_row,
            matrix,
            input,
        } => {
            let matrix = matrix
                .clone()
                .or_else(|| resolved.trace_matrix.as_ref().map(PathBuf::from));
            let input = input
                .clone()
                .or_else(|| resolved.trace_input.as_ref().map(PathBuf::from));
            cmd_trace(
                &resolved,
                &output,
                hamming_weight.unwrap_or(resolved.trace_hamming_weight),
                current.or(resolved.trace_current),
                trace_row.or(resolved.trace_row),
                matrix,
                input,
            )
        }
    }
}

/// Device model with variance, faults, and read noise switched off; the
/// means stay as configured.
fn zero_variance(model: &ResistanceModel) -> ResistanceModel {
    ResistanceModel {
        lrs_sigma: 0.0,
        hrs_sigma: 0.0,
        yield_fault_prob: 0.0,
        read_noise_sigma: 0.0,
        ..model.clone()
    }
}

fn cmd_verify(
    cli: &Cli,
    resolved: &Resolved,
    output: &Output,
    matrix: Option<PathBuf>,
    input: Option<PathBuf>,
    instances_flag: Option<usize>,
) -> Result<i32, Failure> {
    let mut cfg = resolved.system.clone();
    cfg.device = zero_variance(&cfg.device);
    let opts = RunOptions {
        jobs: resolved.jobs,
        collect_diagnostics: false,
    };
    let rows = cfg.subarray.rows;
    let width = cfg.input_width();

    let run_instance = |a: &BitMatrix, x: &BitVector| -> Result<usize, Failure> {
        let outcome = run_bmvm_with(a, x, &cfg, &opts).map_err(config_err)?;
        let oracle = bmvm_exact(a, x).map_err(config_err)?;
        Ok((0..rows)
            .filter(|&r| outcome.y_sim.get(r) != oracle.get(r))
            .count())
    };

    let mut instance_results = Vec::new();
    let mut total_mismatches = 0usize;
    if let (Some(mpath), Some(xpath)) = (&matrix, &input) {
        let a = load_matrix(mpath).map_err(io_err)?;
        let x = load_vector(xpath).map_err(io_err)?;
        let mism = run_instance(&a, &x)?;
        total_mismatches += mism;
        report_instance_line(0, rows, mism);
        instance_results.push(json!({ "instance": 0, "mismatched_rows": mism }));
    } else {
        let n = instances_flag
            .or(cli.trials.map(|t| t as usize))
            .unwrap_or(resolved.verify_instances);
        for i in 0..n {
            let mut rng = substream(cfg.master_seed, Domain::Instance, i as u64);
            let a = BitMatrix::random(rows, width, &mut rng);
            let x = BitVector::random(width, &mut rng);
            let mism = run_instance(&a, &x)?;
            total_mismatches += mism;
            report_instance_line(i, rows, mism);
            instance_results.push(json!({ "instance": i, "mismatched_rows": mism }));
        }
    }

    // Exhaustive decode of one row over every input pattern.
    let exhaustive = {
        let mut one = cfg.clone();
        one.subarray_count = 1;
        one.subarray.rows = 1;
        let bits = one.subarray.compute_cols;
        assert!(bits <= 20, "exhaustive sweep needs compute_cols <= 20");
        let mut rng = substream(cfg.master_seed, Domain::Instance, u32::MAX as u64);
        let a = BitMatrix::random(1, bits, &mut rng);
        let patterns = 1usize << bits;
        let mut mismatches = 0usize;
        for p in 0..patterns {
            let x = BitVector::from_bits(&(0..bits).map(|i| (p >> i) & 1 == 1).collect::<Vec<_>>());
            let out = run_bmvm_with(&a, &x, &one, &opts).map_err(config_err)?;
            if out.y_sim.get(0) != bmvm_exact(&a, &x).map_err(config_err)?.get(0) {
                mismatches += 1;
            }
        }
        eprintln!(
            "exhaustive row decode: {}/{} patterns match oracle",
            patterns - mismatches,
            patterns
        );
        total_mismatches += mismatches;
        json!({ "patterns": patterns, "mismatches": mismatches })
    };

    let passed = total_mismatches == 0;
    eprintln!("verify: {}", if passed { "PASS" } else { "FAIL" });
    let results = json!({
        "instances": instance_results,
        "exhaustive_row": exhaustive,
        "total_mismatches": total_mismatches,
        "passed": passed,
    });
    let report = SimReport::new("verify", resolved, &results, output.timestamp);
    let mut csv = String::from("instance,mismatched_rows\n");
    for r in results["instances"].as_array().unwrap() {
        let _ = writeln!(csv, "{},{}", r["instance"], r["mismatched_rows"]);
    }
    output.emit_report(&report, &csv)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILURE })
}

fn report_instance_line(i: usize, rows: usize, mismatches: usize) {
    if mismatches == 0 {
        eprintln!("instance {i:03}: {rows}/{rows} rows match oracle");
    } else {
        eprintln!("instance {i:03}: {mismatches} of {rows} rows mismatch");
    }
}

fn cmd_margins(cli: &Cli, resolved: &Resolved, output: &Output) -> Result<i32, Failure> {
    let mut opts = resolved.margins.clone();
    if let Some(t) = cli.trials {
        opts.trials_per_scenario = t as usize;
    }
    if opts.trials_per_scenario == 0 {
        return Err(config_err(
            "margins: trials must be at least 1 (recommended: 1e4 or more per scenario)",
        ));
    }
    opts.jobs = resolved.jobs;
    let report = margin_analysis(
        &resolved.system.device,
        &resolved.system.cell,
        resolved.system.variant,
        &opts,
    );
    eprintln!(
        "margins: worst gap {:.4} uA, non-overlapping: {}",
        report.worst_gap * 1e6,
        report.non_overlapping
    );

    let mut csv = String::from(
        "macv,env_min_amps,env_max_amps,mean_amps,std_amps,gap_to_next_amps,non_overlapping\n",
    );
    for env in &report.per_macv {
        let gap = report
            .gaps
            .get(env.macv)
            .map(|g| format!("{g:e}"))
            .unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{:e},{:e},{:e},{:e},{},{}",
            env.macv, env.env_min, env.env_max, env.mean, env.std, gap, report.non_overlapping
        );
    }
    let sim_report = SimReport::new("margins", resolved, &report, output.timestamp);
    output.emit_report(&sim_report, &csv)?;
    Ok(EXIT_OK)
}

fn cmd_ber_sweep(
    cli: &Cli,
    resolved: &Resolved,
    output: &Output,
    compute_bits: Option<Vec<usize>>,
    noise_sigma: Option<f64>,
    calibrate: bool,
    target_ber: f64,
) -> Result<i32, Failure> {
    let bits_list = compute_bits.unwrap_or_else(|| resolved.ber_compute_bits.clone());
    if bits_list.is_empty() {
        return Err(config_err("ber-sweep: empty compute_bits list"));
    }
    let trials = cli.trials.unwrap_or(resolved.ber_trials);
    if trials == 0 {
        return Err(config_err(
            "ber-sweep: trials must be at least 1 (1e7+ recommended for BER near 1e-5)",
        ));
    }

    let mut cfg = resolved.system.clone();
    let sigma = if calibrate {
        let per_iter = (trials / 10).max(100_000);
        eprintln!(
            "calibrating comparator noise to BER {target_ber:.2e} ({per_iter} trials/iter)..."
        );
        calibrate_comparator_noise(&cfg, 9, target_ber, per_iter, 10, resolved.jobs)
    } else {
        noise_sigma.unwrap_or(resolved.ber_noise_sigma)
    };
    cfg.pcspc.comparator_noise_sigma = sigma;

    let mut points = Vec::new();
    for &bits in &bits_list {
        let est = estimate_ber(
            &cfg,
            &BerOptions {
                compute_bits: bits,
                trials,
                input_density: resolved.ber_input_density,
                weight_density: resolved.ber_weight_density,
                jobs: resolved.jobs,
            },
        );
        eprintln!(
            "compute_bits {bits:2}: BER {:.3e} ({} errors / {} trials){}",
            est.ber,
            est.errors,
            est.trials,
            if est.reliable { "" } else { " [upper bound]" }
        );
        points.push((bits, est));
    }
    let monotone = points.windows(2).all(|w| w[0].1.ber <= w[1].1.ber);

    let mut csv = String::from("compute_bits,trials,errors,ber,ci95_low,ci95_high,reliable\n");
    for (bits, est) in &points {
        let _ = writeln!(
            csv,
            "{},{},{},{:e},{:e},{:e},{}",
            bits, est.trials, est.errors, est.ber, est.ci95.0, est.ci95.1, est.reliable
        );
    }
    let results = json!({
        "noise_sigma_volts": sigma,
        "calibrated": calibrate,
        "monotone_in_compute_bits": monotone,
        "points": points
            .iter()
            .map(|(bits, est)| json!({ "compute_bits": bits, "estimate": est }))
            .collect::<Vec<_>>(),
    });
    let report = SimReport::new("ber-sweep", resolved, &results, output.timestamp);
    output.emit_report(&report, &csv)?;
    Ok(EXIT_OK)
}

fn cmd_perf(resolved: &Resolved, output: &Output) -> Result<i32, Failure> {
    let p = &resolved.perf;
    let fpga = FpgaReference::default();
    let throughput = throughput_bits_per_sec(p);
    let ours = energy_efficiency_tops_per_watt(p);
    let theirs = fpga.energy_efficiency_tops_per_watt();
    let readout = readout_power_budget(p.rows, p.pcspc_power_per_row);
    eprintln!(
        "perf: {:.2} Gbps, {:.2} TOPS/W (FPGA {:.2} TOPS/W, ratio {:.2}x)",
        throughput / 1e9,
        ours,
        theirs,
        ours / theirs
    );
    let results = json!({
        "throughput_bits_per_sec": throughput,
        "throughput_gbps": throughput / 1e9,
        "energy_efficiency_tops_per_watt": ours,
        "fpga_reference": {
            "throughput_bits_per_sec": fpga.throughput_bits_per_sec,
            "ops_per_output_bit": fpga.ops_per_output_bit,
            "power_watts": fpga.power,
            "energy_efficiency_tops_per_watt": theirs,
        },
        "improvement_ratio": ours / theirs,
        "readout_power_watts": readout,
        "readout_power_share": readout / p.total_power,
    });
    let mut csv = String::from("metric,value\n");
    for (k, v) in [
        ("throughput_gbps", throughput / 1e9),
        ("energy_efficiency_tops_per_watt", ours),
        ("fpga_energy_efficiency_tops_per_watt", theirs),
        ("improvement_ratio", ours / theirs),
        ("readout_power_watts", readout),
    ] {
        let _ = writeln!(csv, "{k},{v}");
    }
    let report = SimReport::new("perf", resolved, &results, output.timestamp);
    output.emit_report(&report, &csv)?;
    Ok(EXIT_OK)
}

fn cmd_protocol(
    cli: &Cli,
    resolved: &Resolved,
    output: &Output,
    ber: Option<f64>,
) -> Result<i32, Failure> {
    let ber = ber.unwrap_or(resolved.protocol_ber);
    if !(0.0..=1.0).contains(&ber) {
        return Err(config_err(format!("protocol: ber {ber} not a probability")));
    }
    let mut params = resolved.protocol.clone();
    if let Some(t) = cli.trials {
        params.genuine_trials = t;
        params.impostor_trials = t;
    }
    if params.genuine_trials == 0 || params.impostor_trials == 0 {
        return Err(config_err(
            "protocol: trial counts must be at least 1 (1e5 recommended)",
        ));
    }
    let impact = protocol_impact(ber, &params, resolved.system.master_seed, resolved.jobs);
    eprintln!(
        "protocol: FAR {:.2e}, FRR {:.4} -> {:.4} (delta {:+.2}%)",
        impact.far,
        impact.frr_baseline,
        impact.frr_injected,
        impact.frr_delta * 100.0
    );
    let mut csv = String::from("metric,value\n");
    for (k, v) in [
        ("injected_ber", impact.injected_ber),
        ("far", impact.far),
        ("frr_baseline", impact.frr_baseline),
        ("frr_injected", impact.frr_injected),
        ("frr_delta", impact.frr_delta),
    ] {
        let _ = writeln!(csv, "{k},{v}");
    }
    let report = SimReport::new("protocol", resolved, &impact, output.timestamp);
    output.emit_report(&report, &csv)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(
    resolved: &Resolved,
    output: &Output,
    hamming_weight: u32,
    current: Option<f64>,
    trace_row: Option<usize>,
    matrix: Option<PathBuf>,
    input: Option<PathBuf>,
) -> Result<i32, Failure> {
    let cfg = &resolved.system;
    let mut traces: Vec<(String, f64, crate::pcspc::PcspcTrace, Vec<TracePoint>)> = Vec::new();

    if let (Some(row), Some(mpath), Some(xpath)) = (trace_row, &matrix, &input) {
        if row >= cfg.subarray.rows {
            return Err(config_err(format!(
                "trace: row {row} out of range (rows = {})",
                cfg.subarray.rows
            )));
        }
        let a = load_matrix(mpath).map_err(io_err)?;
        let x = load_vector(xpath).map_err(io_err)?;
        if x.len() != cfg.input_width() {
            return Err(config_err(format!(
                "trace: input width {} != {}",
                x.len(),
                cfg.input_width()
            )));
        }
        let subs = map_task(&a, cfg).map_err(config_err)?;
        let cc = cfg.subarray.compute_cols;
        let mut rng = substream(cfg.master_seed, Domain::Readout, row as u64);
        for (s, sub) in subs.iter().enumerate() {
            let x_slice = x.slice(s * cc, (s + 1) * cc);
            let i_mc = crate::array::row_current(sub, row, &x_slice, &cfg.cell, cfg.variant);
            let (trace, wave) = simulate_readout_traced(i_mc, &cfg.pcspc, &mut rng);
            traces.push((format!("subarray{s}"), i_mc, trace, wave));
        }
    } else {
        let i_mc = current.unwrap_or(hamming_weight as f64 * cfg.cell.i_unit);
        if !(i_mc.is_finite() && i_mc >= 0.0) {
            return Err(config_err(format!("trace: bad current {i_mc}")));
        }
        let mut rng = substream(cfg.master_seed, Domain::Readout, 0);
        let (trace, wave) = simulate_readout_traced(i_mc, &cfg.pcspc, &mut rng);
        traces.push(("ideal".to_string(), i_mc, trace, wave));
    }

    let mut csv = String::from("source,time_s,v_charge_volts,event\n");
    for (name, _, _, wave) in &traces {
        for pt in wave {
            let _ = writeln!(
                csv,
                "{},{:e},{:e},{}",
                name,
                pt.time,
                pt.v_charge,
                pt.event.as_str()
            );
        }
    }
    for (name, i_mc, trace, _) in &traces {
        eprintln!(
            "{name}: i_mc {:.3} uA, {} pulses, residual {:.3} V, xor_out {}",
            i_mc * 1e6,
            trace.ramp_pulse_count,
            trace.v_charge_at_sample,
            trace.xor_out as u8
        );
    }
    let results = json!({
        "readouts": traces
            .iter()
            .map(|(name, i_mc, trace, wave)| json!({
                "source": name,
                "i_mc_amps": i_mc,
                "trace": trace,
                "samples": wave.len(),
            }))
            .collect::<Vec<_>>(),
    });
    let report = SimReport::new("trace", resolved, &results, output.timestamp);
    output.emit_report(&report, &csv)?;
    Ok(EXIT_OK)
}
