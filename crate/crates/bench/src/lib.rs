//! Benchmark fixtures shared by the criterion targets in `benches/`.

use covfield_core::micro_sim::{LatticeConfig, LatticeState};
use covfield_core::CouplingFunction;
use num_complex::Complex64;

/// Exponential cutoff with `lambda = cutoff = 1`.
pub fn reference_coupling() -> CouplingFunction {
    CouplingFunction::exp_cutoff(1.0, 1.0).expect("valid parameters")
}

/// Default lattice with the probe mode excited.
pub fn excited_lattice() -> (LatticeConfig, LatticeState) {
    let cfg = LatticeConfig::new(reference_coupling()).expect("valid defaults");
    let mut state = LatticeState::zeros(&cfg);
    state.add_mode(
        &cfg,
        cfg.probe_mode,
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.0),
    );
    (cfg, state)
}
