//! Simulation library for quantum physical unclonable functions (QPUFs)
//! driven by chaotic Hamiltonians.
//!
//! The crate covers the full pipeline at desk scale:
//!
//! - [`ensembles`] — GUE, SYK, and pseudo-chaotic Hamiltonian samplers,
//!   plus Haar and brickwork-design unitaries.
//! - [`spectral`] — eigendecomposition and the spectral diagnostics:
//!   semicircle density, level-spacing statistics, spectral form factor,
//!   and the two-point correlation check.
//! - [`dynamics`] — the QPUF unitary `U(t) = exp(-iHt)`.
//! - [`state`] — pure/density states, entangled pairs, subsystem
//!   measurement, overlaps, and the SWAP test.
//! - [`protocol`] — the selective and measurement-based authentication
//!   protocols as verifier/responder state machines.
//! - [`adversary`] — query-bounded adversaries, Monte Carlo forging
//!   estimates, and the security-bound formulas.
//! - [`probes`] — OTOC, Rényi-2 entropy, operator entanglement, and
//!   stabilizer entropy, with ensemble contrasts.

pub mod adversary;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod probes;
pub mod protocol;
pub mod report;
pub mod seed;
pub mod spectral;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
