//! Fock-space simulation and eavesdropping analysis for interferometric
//! time-bin QKD setups.
//!
//! The crate models photonic qubits as sparse occupation-number states,
//! builds Mach-Zehnder time-bin transforms by explicit composition of beam
//! splitters, phase shifters and delays, and characterizes the attacks on a
//! scheme that can never produce an error at the receiver. On top of that it
//! classifies schemes as robust or nonrobust (with concrete witness attacks)
//! and Monte-Carlo simulates full key-distribution sessions.

pub mod analysis;
pub mod fock;
pub mod interferometer;
pub mod linalg;
pub mod optics;
pub mod schemes;
pub mod session;
pub mod verify;

pub use fock::{Amplitude, FockBasisState, ModeLabel, StateVector};
pub use optics::ModeUnitary;
