//! Quantum reservoir computing on a dissipative Rydberg atom array.
//!
//! The crate simulates a disordered triangular array of two-level Rydberg
//! atoms under Lindblad dynamics and uses it as a reservoir in two
//! architectures: single-step (fresh state per sample, sliding-window
//! inputs) and multi-step (one driven trajectory). Around that sit the
//! characterization tools (level statistics, OTOC, convergence), the
//! readout (exact expectations, classical shadows), ridge-regression
//! learning, information processing capacity and the benchmark tasks.

pub mod capacity;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod learning;
pub mod measurement;
pub mod quantum;
pub mod reservoir;
pub mod rng;
pub mod runner;
pub mod tasks;

pub use error::{QrcError, Result};
