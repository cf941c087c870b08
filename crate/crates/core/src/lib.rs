//! Numerical simulator for a three-step two-atom SWAP protocol in cavity QED.
//!
//! The protocol drives two five-level atoms in a single-mode cavity with
//! inverse-engineered laser pulses. Strong cavity coupling confines the
//! dynamics to a dark (Zeno) subspace; within it, a Lewis–Riesenfeld
//! invariant fixes pulse shapes that complete a population transfer in a
//! fixed finite time. This crate builds the composite Hilbert space, the
//! pulse schedules and invariant, the per-step Hamiltonians, and propagates
//! both pure states (Schrödinger) and density matrices (Lindblad master
//! equation with cavity decay and spontaneous emission).
//!
//! Units: the bare coupling g₀ = 1, so all rates are multiples of g₀ and all
//! times multiples of 1/g₀.

pub mod error;
pub mod linalg;

pub mod checks;
pub mod dynamics;
pub mod hilbert;
pub mod invariant;
pub mod protocol;
pub mod pulses;
pub mod sparse;
pub mod zeno;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
