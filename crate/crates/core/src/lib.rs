//! Sequence-based on-off keying wake-up symbols built from OFDM subcarriers.
//!
//! The crate covers waveform synthesis, the sequence optimizer and its convex
//! subproblem solver, a multipath channel, a non-coherent wake-up receiver,
//! an OFDM data link sharing the band, and the batch experiment harness.

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
mod fft;
pub mod link;
pub mod metrics;
pub mod operator;
pub mod receiver;
pub mod rng;
pub mod scan;
pub mod sequence;
pub mod solver;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sequence::{load_table1, Sequence};
