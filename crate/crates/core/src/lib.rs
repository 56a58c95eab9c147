//! Process matrices for the quantum SWITCH, causal witnesses computed by
//! semidefinite programming, and an emulation of the photonic experiment
//! that measures causal non-separability.
//!
//! The crate is organized bottom-up:
//!
//! * [`tensor`] — labeled tensor-product spaces, Kronecker products, partial
//!   traces, Hermitian eigendecomposition, PSD projection.
//! * [`pauli`] — the fast product-Pauli transform on six qubits and the
//!   subspace masks used by the cone machinery.
//! * [`choi`] — Choi–Jamiołkowski representations of unitaries, Kraus
//!   channels and measure-reprepare instruments.
//! * [`catalog`] — the finite instrument sets of the experiment and their
//!   waveplate compilations.
//! * [`process`] — the SWITCH process matrix, causally ordered processes,
//!   dephasing, validity and order-compatibility tests.
//! * [`born`] — probability evaluation by process-matrix contraction, the
//!   independent circuit oracle, causal tomography.
//! * [`witness`] — the causal-witness SDPs, witness evaluation, worst-case
//!   noise robustness.
//! * [`emulator`] — noisy probabilities, photon counts, detector
//!   efficiencies, drift, and the full estimation pipeline.
//! * [`schema`] — versioned JSON/CSV serialization shared with the CLI.

pub mod born;
pub mod catalog;
pub mod choi;
pub mod emulator;
pub mod error;
pub mod pauli;
pub mod process;
pub mod schema;
pub mod tensor;
pub mod witness;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Scalar type for all operator entries.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
