//! Coupling functions, the reservoir Green's function and the causal
//! memory kernel, with the order-zero Hankel pair linking kernel and
//! spectral strength.

mod coupling;
mod green;
mod memory;

pub use coupling::{CouplingFamily, CouplingFunction, NEGATIVE_SAMPLE_TOL};
pub use green::{green_function, laplace_green, ReservoirGreenFunction};
pub use memory::{
    coupling_from_memory, coupling_from_profile, memory_from_coupling, memory_profile,
    profile_grid, MemoryKernel, SampledProfile, MEMORY_TAIL_TOL, POSITIVITY_TOL,
};
