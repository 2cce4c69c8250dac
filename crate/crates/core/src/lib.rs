//! Grouped code index modulation (GrCIM) for a rate-splitting SDMA downlink.
//!
//! Each user owns a disjoint subset of Walsh-Hadamard codes. Private bits pick
//! the code index on the in-phase and quadrature rails, common bits ride the
//! BPSK symbols spread by those codes. The base station beamforms every user's
//! chip stream with a zero-forcing precoder, and each receiver runs a
//! correlator bank followed by a maximum-likelihood decision.
//!
//! The crate is `no_std` (with `alloc`) and contains:
//!
//! * [`codebook`]: Sylvester Hadamard matrices and per-user code grouping.
//! * [`modem`]: bit mapping, spreading, correlation and ML detection.
//! * [`channel`]: Rayleigh fading, ZF precoding with fairness power allocation,
//!   and AWGN.
//! * [`analysis`]: Q-function, pairwise error probabilities, the closed-form
//!   upper-bound BER and rate/spectrum/capacity comparison metrics.
//! * [`link`]: one block of end-to-end Monte Carlo transmission with
//!   per-user error counters, the building block of a BER sweep.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod channel;
pub mod codebook;
mod error;
pub mod link;
pub mod modem;

pub use error::{Error, Result};

pub use num_complex::Complex64;
