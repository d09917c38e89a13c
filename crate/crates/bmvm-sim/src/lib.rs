//! Behavioral simulator of an RRAM compute-in-memory (CIM) accelerator for
//! binary matrix-vector multiplication (BMVM) over GF(2).
//!
//! The simulated machine maps a static binary matrix onto resistive-memory
//! sub-arrays (LRS = weight 1, HRS = weight 0), accumulates per-row cell
//! currents, and decodes the XOR of each row's products with a pulsed
//! current-sensing parity checker (PCSPC). Everything is checked against a
//! bit-exact GF(2) oracle in [`bitlinalg`].
//!
//! Layers, bottom to top:
//!
//! * [`bitlinalg`] — packed GF(2) vectors/matrices and the exact BMVM oracle.
//! * [`device`] — stochastic LRS/HRS resistance and yield-fault sampling.
//! * [`cell`] — per-cell current transfer (HRS-compensated and plain 1T1R).
//! * [`array`](mod@array) — 512x12 sub-array deployment, redundancy
//!   steering, row current accumulation, and MAC signal-margin analysis.
//! * [`pcspc`] — capacitor-integration parity readout.
//! * [`system`] — full pipeline: tiling, XOR tree, Monte Carlo BER, and the
//!   synthetic authentication-protocol experiment.
//! * [`perf`] — throughput / power / energy-efficiency accounting.
//!
//! Monte Carlo loops draw from counter-derived RNG streams
//! ([`rng::substream`]), so every result is reproducible bit-for-bit under
//! any thread count. The `parallel` feature (default on) runs the loops on
//! rayon; without it the same code paths run sequentially.

pub mod array;
pub mod bitlinalg;
pub mod cell;
pub mod cli;
pub mod config;
pub mod device;
pub mod error;
pub mod par;
pub mod pcspc;
pub mod perf;
pub mod report;
pub mod rng;
pub mod system;

pub use error::SimError;
