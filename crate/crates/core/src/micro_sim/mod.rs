//! Brute-force lattice oracle: the field and a discretised reservoir
//! co-simulated with a symplectic leapfrog on a periodic lattice, and the
//! comparisons of that simulation against the mode-response predictions
//! and the nonlocal Langevin equation.

mod compare;
mod config;
mod lattice;

pub use compare::{
    run_langevin_comparison, run_langevin_comparison_with, run_quiescent_comparison, vacuum_state,
    Comparison, LangevinSetup,
};
pub use config::LatticeConfig;
pub use lattice::{step, total_energy, EnergyReport, Lattice, LatticeState, Trajectory};
