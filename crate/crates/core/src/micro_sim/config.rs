use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::kernel::CouplingFunction;
use crate::numerics::QuadratureGrid;

/// Discretisation of the field–reservoir system.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    /// number of sites, a power of two
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub m: f64,
    pub coupling: CouplingFunction,
    /// reservoir frequencies `w_j` and weights `w_j`
    pub omega_grid: QuadratureGrid,
    pub t_max: f64,
    /// Fourier index of the recorded mode, `k = 2 pi q / L`
    pub probe_mode: usize,
    /// steps between recorded samples
    pub output_stride: usize,
}

impl LatticeConfig {
    pub const NX: usize = 256;
    pub const DX: f64 = 0.1;
    /// Largest step below `0.1 / omega_max` for the default 20.
    pub const DT: f64 = 0.004;
    pub const N_OMEGA: usize = 200;
    pub const OMEGA_MAX: f64 = 20.0;
    pub const T_MAX: f64 = 10.0;

    /// 256 sites of 0.1, `dt = 0.004`, `m = 1`, 200 Gauss–Legendre
    /// reservoir frequencies on `[0, 20]`, `T = 10`, probe mode 1.
    pub fn new(coupling: CouplingFunction) -> Result<Self> {
        Ok(Self {
            nx: Self::NX,
            dx: Self::DX,
            dt: Self::DT,
            m: 1.0,
            coupling,
            omega_grid: QuadratureGrid::gauss_legendre(Self::N_OMEGA, 0.0, Self::OMEGA_MAX)?,
            t_max: Self::T_MAX,
            probe_mode: 1,
            output_stride: 25,
        })
    }

    pub fn with_reservoir(mut self, n_omega: usize, omega_max: f64) -> Result<Self> {
        self.omega_grid = QuadratureGrid::gauss_legendre(n_omega, 0.0, omega_max)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(domain("LatticeConfig", msg));
        if !self.nx.is_power_of_two() || self.nx < 4 {
            return bad(format!("nx must be a power of two >= 4, got {}", self.nx));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return bad(format!("dx must be > 0, got {}", self.dx));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad(format!("m must be > 0, got {}", self.m));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be > 0, got {}", self.t_max));
        }
        let top = self.omega_max();
        let limit = (self.dx / 2f64.sqrt()).min(0.1 / self.m.max(top));
        if !(self.dt > 0.0 && self.dt < limit) {
            return bad(format!(
                "dt = {} violates dt < min(dx/sqrt 2, 0.1/max(m, omega_max)) = {limit}",
                self.dt
            ));
        }
        if self.probe_mode == 0 || self.probe_mode >= self.nx / 2 {
            return bad(format!(
                "probe_mode must lie in 1..{}, got {}",
                self.nx / 2,
                self.probe_mode
            ));
        }
        if self.output_stride == 0 {
            return bad("output_stride must be >= 1".into());
        }
        Ok(())
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_grid.domain().1
    }

    pub fn length(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }

    /// `2 pi q / L`
    pub fn wavenumber(&self, q: usize) -> f64 {
        2.0 * PI * q as f64 / self.length()
    }

    /// Wavenumber seen by the 3-point Laplacian: `(2/dx) sin(k dx / 2)`.
    pub fn lattice_wavenumber(&self, q: usize) -> f64 {
        2.0 / self.dx * (0.5 * self.wavenumber(q) * self.dx).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_satisfy_cfl() {
        let c = LatticeConfig::new(CouplingFunction::exp_cutoff(1.0, 1.0).unwrap()).unwrap();
        c.validate().unwrap();
        assert_eq!(c.n_steps(), 2500);
        assert!((c.length() - 25.6).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_settings() {
        let base = LatticeConfig::new(CouplingFunction::exp_cutoff(1.0, 1.0).unwrap()).unwrap();
        for c in [
            LatticeConfig {
                nx: 100,
                ..base.clone()
            },
            LatticeConfig {
                dt: 0.01,
                ..base.clone()
            },
            LatticeConfig {
                dt: 0.005,
                ..base.clone()
            },
            LatticeConfig {
                probe_mode: 0,
                ..base.clone()
            },
            LatticeConfig {
                m: 0.0,
                ..base.clone()
            },
        ] {
            assert!(c.validate().is_err());
        }
    }
}
