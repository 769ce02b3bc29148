//! Topological state transfer in a one-dimensional cavity-magnon chain.
//!
//! The chain has `N+1` cavity modes and `N` magnon modes; in the
//! single-excitation subspace it is an SSH-type tight-binding model whose
//! couplings are pumped by a parameter `theta`. This crate builds the
//! Hamiltonian, analyses its spectrum and gap state along `theta`, integrates
//! the adiabatic ramp and reports transfer fidelities, and drives the
//! parameter sweeps used by the `cmchain` command-line tool.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod spectral;
pub mod state;

pub use dynamics::{evolve, propagate_piecewise, RampProtocol, TransferResult};
pub use error::{Error, Result};
pub use model::{build_hamiltonian, schedule, ChainSpec, CouplingPoint, HamiltonianMatrix, SiteIndex, SiteKind};
pub use spectral::{analytic_zero_mode, eigendecompose, gap_width, localization_profile, scan_spectrum, SpectrumScan};
pub use state::{fidelity, StateVector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
