//! Synthetic authentication-protocol experiment.
//!
//! Models an LPN-style biometric commitment: enrollment stores
//! `c = A*s XOR f_enroll`, where `A` is the static matrix, `s` the secret
//! key, and `f_enroll` the enrolled binary feature vector. At verification
//! the device recomputes `A*s` (this is the BMVM the hardware runs, so
//! hardware bit errors land here), unmasks `c XOR A*s = f_enroll`, and
//! accepts when the Hamming distance to the presented feature vector is
//! within the threshold.
//!
//! Genuine probes flip each enrolled feature bit with the intra-class rate;
//! impostor probes with the inter-class rate (0.5 = unrelated identity).
//! Hardware errors flip each recomputed commitment bit with probability
//! `ber`. Baseline (no injection) and injected runs share trial streams, so
//! the reported FRR delta is a paired estimate: at `ber = 0` it is exactly
//! zero.

use crate::bitlinalg::{bmvm_exact, BitMatrix, BitVector};
use crate::par::{count_indexed, Jobs};
use crate::rng::{substream, Domain};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Parameters of the synthetic dataset and protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Feature vector length; equals the commitment length (task rows).
    pub feature_len: usize,
    /// Secret key length (task input width).
    pub key_len: usize,
    /// Per-bit flip rate between two captures of the same identity.
    pub intra_class_flip_rate: f64,
    /// Per-bit flip rate against a different identity.
    pub inter_class_flip_rate: f64,
    /// Accept when the Hamming distance is at or below this.
    pub accept_threshold: u32,
    pub genuine_trials: u64,
    pub impostor_trials: u64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            feature_len: 512,
            key_len: 36,
            intra_class_flip_rate: 0.10,
            inter_class_flip_rate: 0.50,
            accept_threshold: 64,
            genuine_trials: 100_000,
            impostor_trials: 100_000,
        }
    }
}

/// Outcome of the protocol experiment at one injected BER.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolImpact {
    pub injected_ber: f64,
    /// False acceptance rate with injection.
    pub far: f64,
    /// False rejection rate without injection.
    pub frr_baseline: f64,
    /// False rejection rate with injection.
    pub frr_injected: f64,
    /// Relative FRR increase, `(injected - baseline) / baseline`.
    pub frr_delta: f64,
    pub genuine_trials: u64,
    pub impostor_trials: u64,
}

fn flip_random_bits(v: &mut BitVector, rate: f64, rng: &mut impl Rng) {
    if rate <= 0.0 {
        return;
    }
    let n = v.len() as u64;
    let count = Binomial::new(n, rate).expect("valid rate").sample(rng) as usize;
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    while chosen.len() < count {
        let i = rng.random_range(0..v.len());
        if !chosen.contains(&i) {
            v.set(i, !v.get(i));
            chosen.push(i);
        }
    }
}

fn noisy_copy(v: &BitVector, rate: f64, rng: &mut impl Rng) -> BitVector {
    let mut out = v.clone();
    for i in 0..out.len() {
        if rng.random_bool(rate) {
            out.set(i, !out.get(i));
        }
    }
    out
}

/// Measures FAR and the FRR impact of computing the commitment BMVM on
/// hardware with bit error rate `ber`.
pub fn protocol_impact(
    ber: f64,
    params: &ProtocolParams,
    master_seed: u64,
    jobs: Jobs,
) -> ProtocolImpact {
    assert!((0.0..=1.0).contains(&ber), "ber must be a probability");

    // Static task: one matrix and key for the whole run.
    let mut setup = substream(master_seed, Domain::ProtocolSetup, 0);
    let a = BitMatrix::random(params.feature_len, params.key_len, &mut setup);
    let s = BitVector::random(params.key_len, &mut setup);
    let mask = bmvm_exact(&a, &s).expect("setup dimensions");
    let threshold = params.accept_threshold;

    // One verification attempt: store c = A*s XOR enrolled, recompute A*s
    // (with injected flips when modeling the hardware), unmask, compare.
    let attempt = |enrolled: &BitVector, probe: &BitVector, flips: Option<(u64, f64)>| {
        let commitment = mask.xor(enrolled);
        let mut recomputed = mask.clone();
        if let Some((t, rate)) = flips {
            let mut flip_rng = substream(master_seed, Domain::ProtocolFlips, t);
            flip_random_bits(&mut recomputed, rate, &mut flip_rng);
        }
        let recovered = commitment.xor(&recomputed);
        recovered.xor(probe).hamming_weight()
    };

    // Genuine attempts: count rejections with and without injected errors.
    // Shared streams make the comparison paired.
    let run_genuine = |inject: bool| {
        count_indexed(jobs, params.genuine_trials, |t| {
            let mut rng = substream(master_seed, Domain::ProtocolGenuine, t);
            let enrolled = BitVector::random(params.feature_len, &mut rng);
            let probe = noisy_copy(&enrolled, params.intra_class_flip_rate, &mut rng);
            let flips = inject.then_some((t, ber));
            attempt(&enrolled, &probe, flips) > threshold // rejection
        })
    };
    let rejected_baseline = run_genuine(false);
    let rejected_injected = run_genuine(ber > 0.0);

    let accepted_impostor = count_indexed(jobs, params.impostor_trials, |t| {
        let mut rng = substream(master_seed, Domain::ProtocolImpostor, t);
        let enrolled = BitVector::random(params.feature_len, &mut rng);
        let probe = noisy_copy(&enrolled, params.inter_class_flip_rate, &mut rng);
        attempt(&enrolled, &probe, Some((t, ber))) <= threshold // false acceptance
    });

    let frr_baseline = rejected_baseline as f64 / params.genuine_trials as f64;
    let frr_injected = rejected_injected as f64 / params.genuine_trials as f64;
    let frr_delta = if frr_baseline > 0.0 {
        (frr_injected - frr_baseline) / frr_baseline
    } else if frr_injected > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };

    ProtocolImpact {
        injected_ber: ber,
        far: accepted_impostor as f64 / params.impostor_trials as f64,
        frr_baseline,
        frr_injected,
        frr_delta,
        genuine_trials: params.genuine_trials,
        impostor_trials: params.impostor_trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_params() -> ProtocolParams {
        ProtocolParams {
            genuine_trials: 20_000,
            impostor_trials: 20_000,
            ..ProtocolParams::default()
        }
    }

    #[test]
    fn zero_ber_changes_nothing() {
        let impact = protocol_impact(0.0, &quick_params(), 7, 0);
        assert_eq!(impact.frr_delta, 0.0);
        assert_eq!(impact.frr_baseline, impact.frr_injected);
        assert_eq!(impact.far, 0.0);
    }

    #[test]
    fn baseline_frr_is_nonzero_but_small() {
        let impact = protocol_impact(0.0, &quick_params(), 8, 0);
        assert!(
            impact.frr_baseline > 0.001 && impact.frr_baseline < 0.2,
            "baseline FRR {}",
            impact.frr_baseline
        );
    }

    #[test]
    fn far_stays_zero_at_reference_ber() {
        let impact = protocol_impact(1.6e-5, &quick_params(), 9, 0);
        assert_eq!(impact.far, 0.0);
    }

    #[test]
    fn frr_delta_grows_with_ber() {
        let params = quick_params();
        let low = protocol_impact(1.6e-5, &params, 10, 0);
        let high = protocol_impact(1.0e-2, &params, 10, 0);
        assert!(
            high.frr_delta > low.frr_delta,
            "delta {} at 1e-2 vs {} at 1.6e-5",
            high.frr_delta,
            low.frr_delta
        );
        assert!(high.frr_delta > 0.0);
    }

    #[test]
    fn deterministic_across_jobs() {
        let params = quick_params();
        let a = protocol_impact(1.0e-3, &params, 11, 1);
        let b = protocol_impact(1.0e-3, &params, 11, 2);
        assert_eq!(a, b);
    }
}
