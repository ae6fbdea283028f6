//! Numerical toolkit for a scalar field in 1+1 dimensions coupled linearly
//! to a continuum of Klein–Gordon reservoir fields.
//!
//! Module map:
//!
//! * [`numerics`]: Bessel `J0`, Gauss–Legendre grids, Hankel and inverse
//!   Laplace transforms.
//! * [`kernel`]: coupling functions, the reservoir Green's function and the
//!   causal memory kernel, with the Hankel pair between them.
//! * [`response`]: the transformed susceptibility, mode response functions
//!   `alpha(k,t)`, `beta(k,t)` by two routes, and the on-shell limit.
//! * [`quantum`]: noise commutator, fluctuation–dissipation ratio and the
//!   steady-state two-point function.
//! * [`micro_sim`]: brute-force lattice co-simulation of field and reservoir.
//! * [`io`]: `%.17g` CSV tables.

// `!(x > y)` rejects NaN along with out-of-range values; used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod kernel;
pub mod micro_sim;
pub mod numerics;
pub mod quantum;
pub mod response;

pub use error::{Error, Result};
pub use kernel::{CouplingFamily, CouplingFunction, MemoryKernel, ReservoirGreenFunction};
pub use micro_sim::{EnergyReport, LatticeConfig, LatticeState};
pub use numerics::{LaplaceInversionConfig, LaplaceMethod, QuadratureGrid};
pub use quantum::{FdtSample, NoiseCommutatorSample, SteadyStateCorrelator};
pub use response::{DispersionSample, ModeResponse, OnShellLimit, VolterraConfig};
