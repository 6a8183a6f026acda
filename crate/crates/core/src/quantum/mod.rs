//! Dense complex linear algebra and quantum-state primitives.
//!
//! Basis convention: |0⟩ = |g⟩, |1⟩ = |r⟩, `Z = diag(+1, −1)`, and site 0 is
//! the leftmost tensor factor (most significant bit of a basis index).
//! Everything is dense; beyond 8 sites memory and time grow quickly and
//! [`MAX_SITES`] is a hard cap.

pub mod linalg;
pub mod local;
pub mod matrix;
pub mod pauli;
pub mod state;

pub use linalg::{eig_hermitian, eigvals_hermitian, matrix_exp, HermitianEigen};
pub use matrix::{kron, ComplexMatrix};
pub use pauli::{embed_pauli, Pauli, PauliString};
pub use state::{partial_trace, trace_distance, DensityMatrix, StateDiagnostics};

pub const MAX_SITES: usize = 10;
pub const WARN_SITES: usize = 8;
