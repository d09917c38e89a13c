//! Monte Carlo bit-error-rate estimation.
//!
//! A trial draws a fresh random row (weights and inputs i.i.d. Bernoulli,
//! densities configurable), fresh device samples, runs the current
//! accumulation and PCSPC readout, and compares the decoded bit with the
//! exact parity. Trial `t` draws from stream `(master_seed, BerTrial, t)`,
//! so the error count is independent of scheduling.

use super::SystemConfig;
use crate::cell::unit_current;
use crate::device::{sample_resistance, ResState};
use crate::par::{count_indexed, Jobs};
use crate::pcspc::simulate_readout;
use crate::rng::{substream, Domain};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// BER estimate with a binomial (Wilson) 95% confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ber: f64,
    pub ci95: (f64, f64),
    /// False when fewer than 10 errors were observed; the estimate is then
    /// only an upper bound.
    pub reliable: bool,
}

impl BerEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        assert!(trials > 0, "BER needs at least one trial");
        let n = trials as f64;
        let p = errors as f64 / n;
        // Wilson score interval, z = 1.96.
        let z = 1.96;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            errors,
            trials,
            ber: p,
            ci95: ((center - half).max(0.0), (center + half).min(1.0)),
            reliable: errors >= 10,
        }
    }
}

/// Knobs for [`estimate_ber`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BerOptions {
    /// Data bits per row (the bias bit is always added on top).
    pub compute_bits: usize,
    pub trials: u64,
    pub input_density: f64,
    pub weight_density: f64,
    pub jobs: Jobs,
}

impl Default for BerOptions {
    fn default() -> Self {
        Self {
            compute_bits: 9,
            trials: 1_000_000,
            input_density: 0.5,
            weight_density: 0.5,
            jobs: 0,
        }
    }
}

/// Estimates the probability that a decoded row bit differs from the exact
/// parity, over random weights, inputs, device samples, and comparator
/// noise.
pub fn estimate_ber(cfg: &SystemConfig, opts: &BerOptions) -> BerEstimate {
    assert!(opts.trials > 0 && opts.compute_bits > 0);
    let errors = count_indexed(opts.jobs, opts.trials, |t| {
        let mut rng = substream(cfg.master_seed, Domain::BerTrial, t);
        let mut i_mc = 0.0;
        let mut oracle = false;
        for _ in 0..opts.compute_bits {
            let weight = rng.random_bool(opts.weight_density);
            let input = rng.random_bool(opts.input_density);
            oracle ^= weight & input;
            let state = if weight { ResState::Lrs } else { ResState::Hrs };
            let d = sample_resistance(&cfg.device, state, &mut rng);
            i_mc += unit_current(input, state, &d, &cfg.cell, cfg.variant);
        }
        let bias = sample_resistance(&cfg.device, ResState::Lrs, &mut rng);
        i_mc += unit_current(true, ResState::Lrs, &bias, &cfg.cell, cfg.variant);

        let trace = simulate_readout(i_mc, &cfg.pcspc, &mut rng);
        trace.xor_out != oracle
    });
    BerEstimate::from_counts(errors, opts.trials)
}

/// Fits the comparator noise sigma so that the estimated BER hits
/// `target_ber`, by bisection on the (monotone) BER-vs-sigma curve.
///
/// The returned sigma is meant to be written back into
/// `cfg.pcspc.comparator_noise_sigma` for subsequent BER experiments.
pub fn calibrate_comparator_noise(
    cfg: &SystemConfig,
    compute_bits: usize,
    target_ber: f64,
    trials_per_iter: u64,
    iterations: usize,
    jobs: Jobs,
) -> f64 {
    assert!(target_ber > 0.0 && target_ber < 0.5);
    let mut lo = 1.0e-4 * cfg.pcspc.v_th;
    let mut hi = cfg.pcspc.v_ref;
    let opts = BerOptions {
        compute_bits,
        trials: trials_per_iter,
        jobs,
        ..BerOptions::default()
    };
    for _ in 0..iterations {
        let mid = (lo * hi).sqrt();
        let mut probe = cfg.clone();
        probe.pcspc.comparator_noise_sigma = mid;
        let est = estimate_ber(&probe, &opts);
        if est.ber < target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::ResistanceModel;

    #[test]
    fn ideal_limit_has_zero_errors() {
        let cfg = SystemConfig::ideal();
        let est = estimate_ber(
            &cfg,
            &BerOptions {
                trials: 20_000,
                ..BerOptions::default()
            },
        );
        assert_eq!(est.errors, 0);
        assert_eq!(est.ber, 0.0);
        assert!(!est.reliable);
    }

    #[test]
    fn default_devices_without_noise_still_decode_cleanly() {
        let cfg = SystemConfig::default();
        let est = estimate_ber(
            &cfg,
            &BerOptions {
                trials: 50_000,
                ..BerOptions::default()
            },
        );
        assert_eq!(est.errors, 0, "ber {}", est.ber);
    }

    #[test]
    fn more_compute_bits_mean_more_errors() {
        let mut cfg = SystemConfig::default();
        // Noise high enough to produce errors quickly at small trial counts.
        cfg.pcspc.comparator_noise_sigma = 0.06;
        let mut prev = None;
        for bits in [7, 11] {
            let est = estimate_ber(
                &cfg,
                &BerOptions {
                    compute_bits: bits,
                    trials: 200_000,
                    ..BerOptions::default()
                },
            );
            assert!(est.errors > 0);
            if let Some(p) = prev {
                assert!(est.ber >= p, "BER fell from {p} to {}", est.ber);
            }
            prev = Some(est.ber);
        }
    }

    #[test]
    fn noise_monotonicity() {
        let cfg = SystemConfig::default();
        let opts = BerOptions {
            trials: 100_000,
            ..BerOptions::default()
        };
        let mut prev = -1.0;
        for sigma in [0.0, 0.04, 0.08] {
            let mut c = cfg.clone();
            c.pcspc.comparator_noise_sigma = sigma;
            let est = estimate_ber(&c, &opts);
            assert!(est.ber >= prev, "BER fell at sigma={sigma}");
            prev = est.ber;
        }
    }

    #[test]
    fn estimate_is_deterministic_across_jobs() {
        let mut cfg = SystemConfig::default();
        cfg.pcspc.comparator_noise_sigma = 0.05;
        let a = estimate_ber(
            &cfg,
            &BerOptions {
                trials: 30_000,
                jobs: 1,
                ..BerOptions::default()
            },
        );
        let b = estimate_ber(
            &cfg,
            &BerOptions {
                trials: 30_000,
                jobs: 2,
                ..BerOptions::default()
            },
        );
        assert_eq!(a, b);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let est = BerEstimate::from_counts(16, 1_000_000);
        assert!(est.ci95.0 < est.ber && est.ber < est.ci95.1);
        assert!(est.reliable);
        let est = BerEstimate::from_counts(3, 1_000_000);
        assert!(!est.reliable);
        let est = BerEstimate::from_counts(0, 100);
        assert_eq!(est.ci95.0, 0.0);
        assert!(est.ci95.1 > 0.0);
    }

    #[test]
    fn calibration_brackets_a_coarse_target() {
        // Coarse, fast check: fit a large target so few trials suffice.
        let cfg = SystemConfig {
            device: ResistanceModel::default(),
            ..SystemConfig::default()
        };
        let sigma = calibrate_comparator_noise(&cfg, 9, 1.0e-3, 50_000, 8, 0);
        let mut probe = cfg.clone();
        probe.pcspc.comparator_noise_sigma = sigma;
        let est = estimate_ber(
            &probe,
            &BerOptions {
                trials: 200_000,
                ..BerOptions::default()
            },
        );
        assert!(
            est.ber > 1.0e-4 && est.ber < 1.0e-2,
            "calibrated BER {} at sigma {sigma}",
            est.ber
        );
    }
}
