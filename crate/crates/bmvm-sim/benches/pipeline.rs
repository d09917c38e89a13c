//! Parallel vs sequential throughput of the Monte Carlo paths.
//!
//! `jobs = 1` forces the sequential fallback; `jobs = 0` uses the rayon
//! default. Results are identical either way (per-index RNG streams), so
//! these benches measure scheduling overhead and speedup only.

use bmvm_sim::array::{margin_analysis, MarginOptions};
use bmvm_sim::bitlinalg::{bmvm_exact, BitMatrix, BitVector};
use bmvm_sim::rng::{substream, Domain};
use bmvm_sim::system::{estimate_ber, run_bmvm_with, BerOptions, RunOptions, SystemConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bench_bmvm_oracle(c: &mut Criterion) {
    let mut rng = substream(100, Domain::Instance, 0);
    let a = BitMatrix::random(512, 36, &mut rng);
    let x = BitVector::random(36, &mut rng);
    c.bench_function("bmvm_exact_512x36", |b| {
        b.iter(|| black_box(bmvm_exact(black_box(&a), black_box(&x)).unwrap()))
    });
}

fn bench_run_bmvm(c: &mut Criterion) {
    let cfg = SystemConfig::default();
    let mut rng = substream(101, Domain::Instance, 0);
    let a = BitMatrix::random(512, 36, &mut rng);
    let x = BitVector::random(36, &mut rng);
    let mut group = c.benchmark_group("run_bmvm_512x36");
    group.sample_size(10);
    for jobs in [1usize, 0] {
        let label = if jobs == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &jobs, |b, &jobs| {
            let opts = RunOptions {
                jobs,
                collect_diagnostics: false,
            };
            b.iter(|| black_box(run_bmvm_with(&a, &x, &cfg, &opts).unwrap()))
        });
    }
    group.finish();
}

fn bench_estimate_ber(c: &mut Criterion) {
    let mut cfg = SystemConfig::default();
    cfg.pcspc.comparator_noise_sigma = 0.03;
    let mut group = c.benchmark_group("estimate_ber_10k_trials");
    group.sample_size(10);
    for jobs in [1usize, 0] {
        let label = if jobs == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &jobs, |b, &jobs| {
            let opts = BerOptions {
                trials: 10_000,
                jobs,
                ..BerOptions::default()
            };
            b.iter(|| black_box(estimate_ber(&cfg, &opts)))
        });
    }
    group.finish();
}

fn bench_margin_analysis(c: &mut Criterion) {
    let cfg = SystemConfig::default();
    let mut group = c.benchmark_group("margin_analysis_1k_per_scenario");
    group.sample_size(10);
    for jobs in [1usize, 0] {
        let label = if jobs == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &jobs, |b, &jobs| {
            let opts = MarginOptions {
                trials_per_scenario: 1_000,
                jobs,
                ..MarginOptions::default()
            };
            b.iter(|| black_box(margin_analysis(&cfg.device, &cfg.cell, cfg.variant, &opts)))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_bmvm_oracle,
    bench_run_bmvm,
    bench_estimate_ber,
    bench_margin_analysis
);
criterion_main!(benches);
