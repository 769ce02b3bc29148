//! Shared workloads for the criterion benchmarks.

use cmchain_core::{ChainSpec, RampProtocol};

/// The L = 21 photonic chain with a weak cavity-cavity coupling.
pub fn photonic_chain() -> ChainSpec {
    ChainSpec::new(10, 1.0, 1.0, 0.125).expect("valid preset")
}

/// The L = 5 magnon-to-photon chain.
pub fn magnon_to_photon_chain() -> ChainSpec {
    ChainSpec::new(2, 16.0, 1.0, 8.0).expect("valid preset")
}

pub fn fast_ramp() -> RampProtocol {
    RampProtocol::new(0.03).expect("positive omega")
}
