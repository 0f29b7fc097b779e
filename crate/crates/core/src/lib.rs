//! Photon indistinguishability and white noise in interferometric phase estimation.
//!
//! The crate works in the fixed-photon-number Fock space of four bosonic modes
//! (two interferometer ports times two distinguishing labels). It provides the
//! probe states, the phase-encoding dynamics, the two-photon measurement
//! families, every Fisher-information quantity derived from them, and a
//! simulator for the photon-counting experiment that estimates those
//! quantities from Poissonian data.
//!
//! ```
//! use indist_phase::fock::{build_basis, hamiltonian};
//! use indist_phase::probes::pure_probe;
//! use indist_phase::fisher::{qfi_pure, qfi_formula_pure};
//!
//! let basis = build_basis(2).unwrap();
//! let probe = pure_probe(&basis, 0.5).unwrap();
//! let qfi = qfi_pure(&probe, &hamiltonian(&basis)).unwrap();
//! assert!((qfi.value - qfi_formula_pure(2, 0.5).unwrap()).abs() < 1e-9);
//! ```

pub mod cli;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod fisher;
pub mod fock;
pub mod measurement;
pub mod probes;

pub use error::{Error, Result};
