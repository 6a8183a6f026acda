//! The Rydberg-array reservoir: geometry, Hamiltonian, dissipation and the
//! per-input CPTP map.

pub mod config;
pub mod hamiltonian;
pub mod lattice;
pub mod lindblad;

pub use config::ReservoirConfig;
pub use hamiltonian::{build_hamiltonian, Hamiltonian};
pub use lattice::{build_lattice, Lattice};
pub use lindblad::{apply_input_map, build_jump_ops, evolve, evolve_with, IntegratorOptions, JumpOperator, Reservoir};
