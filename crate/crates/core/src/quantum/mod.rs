//! Vacuum statistics: the noise-current commutator, the fluctuation–
//! dissipation ratio and the large-time two-point function of the field.

mod commutator;
mod correlator;
mod noise;

pub use commutator::{commutator_check, CommutatorGrids, NoiseCommutatorSample};
pub use correlator::{steady_correlator, CorrelatorGrids, SteadyState, SteadyStateCorrelator};
pub use noise::{
    fdt_check, noise_power, noise_spectral_density, FdtSample, NoiseSpectralDensity,
    FDT_DENSITY_RATIO,
};
