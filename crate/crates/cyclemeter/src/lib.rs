//! Cyclemeter: exact and asymptotic statistics of the order of random
//! permutations with cycle weights.
//!
//! The crate models the measure on the symmetric group that weights a
//! permutation by prod_m theta_m^{C_m}, where C_m counts cycles of length
//! m. Around that measure it provides:
//!
//! * exact normalization tables and coefficient-extraction expectations
//!   ([`series`]),
//! * cycle-type order statistics and a brute-force enumeration oracle
//!   ([`permstat`]),
//! * an exact sequential sampler with deterministic parallel Monte Carlo
//!   ([`sampler`]),
//! * sieve-backed number theory ([`numtheory`]),
//! * closed-form evaluators for the limit theorems the measure satisfies,
//!   from central limit and local limit constants to precise large
//!   deviations and expansions of the expected order over Riemann zeta
//!   zeros ([`asymptotics`]),
//! * a batch experiment CLI ([`cli`]).

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod numtheory;
pub mod permstat;
pub mod sampler;
pub mod series;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
