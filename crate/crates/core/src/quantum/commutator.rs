use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernel::{memory_profile, CouplingFunction, MemoryKernel};
use crate::numerics::{legendre_rule, QuadratureGrid};

/// Both sides of `[J(x,t), J(0,0)] / i` at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCommutatorSample {
    pub dx: f64,
    pub dt: f64,
    /// `-int f^2(w) Delta_w(dx, dt) dw`, with the Pauli–Jordan function
    /// `Delta_w` as a wavenumber integral
    pub lhs: f64,
    /// `theta(dt) gamma(dx, dt) - theta(-dt) gamma(-dx, -dt)`
    pub rhs: f64,
}

impl NoiseCommutatorSample {
    /// `|lhs - rhs| / max(1, |rhs|)`
    pub fn scaled_error(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs().max(1.0)
    }
}

/// Quadrature settings of the commutator's mode integral.
///
/// `Delta_w(x,t) = (1/pi) int_0^inf cos(kx) sin(w_k t) / w_k dk` converges
/// only conditionally; it is damped by `exp(-regulator (k/k_max)^2)`. The
/// damping smears the light-cone jump over `2 sqrt(regulator) / k_max` and
/// biases the smooth part at order `regulator / k_max^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorGrids {
    pub k_max: f64,
    pub regulator: f64,
    pub omega: QuadratureGrid,
}

impl CommutatorGrids {
    /// `k_max = 40`, `regulator = 1`, order-8 panels on the coupling's breakpoints.
    pub fn for_coupling(f: &CouplingFunction) -> Result<Self> {
        Ok(Self {
            k_max: 40.0,
            regulator: 1.0,
            omega: QuadratureGrid::from_breakpoints(&f.breakpoints(), 8)?,
        })
    }
}

pub fn commutator_check(
    f: &CouplingFunction,
    dx: f64,
    dt: f64,
    grids: &CommutatorGrids,
) -> Result<NoiseCommutatorSample> {
    if !(dx.is_finite() && dt.is_finite()) {
        return Err(domain(
            "commutator_check",
            format!("separation must be finite, got ({dx}, {dt})"),
        ));
    }
    if !(grids.k_max > 0.0 && grids.regulator > 0.0) {
        return Err(domain(
            "commutator_check",
            "k_max and regulator must be > 0",
        ));
    }
    Ok(NoiseCommutatorSample {
        dx,
        dt,
        lhs: mode_integral(f, dx, dt, grids)?,
        rhs: kernel_side(f, dx, dt)?,
    })
}

fn kernel_side(f: &CouplingFunction, dx: f64, dt: f64) -> Result<f64> {
    let gamma = |x: f64, t: f64| -> Result<f64> {
        if t < x.abs() {
            return Ok(0.0);
        }
        let u = ((t - x) * (t + x)).sqrt();
        match MemoryKernel::closed_form(f) {
            Some(k) => Ok(k.profile(u)),
            None => memory_profile(f, u),
        }
    };
    let mut v = 0.0;
    if dt >= 0.0 {
        v += gamma(dx, dt)?;
    }
    if dt <= 0.0 {
        v -= gamma(-dx, -dt)?;
    }
    Ok(v)
}

fn mode_integral(f: &CouplingFunction, dx: f64, dt: f64, grids: &CommutatorGrids) -> Result<f64> {
    if dt == 0.0 || f.is_zero() {
        return Ok(0.0);
    }
    let weights: Vec<(f64, f64)> = grids
        .omega
        .iter()
        .map(|(w, wt)| (w, wt * f.f2(w)))
        .filter(|&(_, c)| c != 0.0)
        .collect();
    // e^{-37} is below double precision relative to the integrand
    let k_top = grids.k_max * (37.0 / grids.regulator).sqrt();
    let width = 0.75f64.min(0.5 * PI / (dx.abs() + dt.abs()));
    let panels = (k_top / width).ceil() as usize;
    let h = k_top / panels as f64;
    let (x, w) = legendre_rule(12)?;
    let partial: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let mut s = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let k = h * (p as f64 + 0.5 * (1.0 + xi));
                let damp = (-grids.regulator * (k / grids.k_max).powi(2)).exp() * (k * dx).cos();
                let mut inner = 0.0;
                for &(om, c) in &weights {
                    let wk = om.hypot(k);
                    inner += c * if wk == 0.0 { dt } else { (wk * dt).sin() / wk };
                }
                s += wi * damp * inner;
            }
            0.5 * h * s
        })
        .collect();
    let v = -partial.iter().sum::<f64>() / PI;
    if !v.is_finite() {
        return Err(Error::Convergence {
            op: "commutator_check",
            msg: format!("non-finite mode integral at ({dx}, {dt})"),
        });
    }
    Ok(v)
}
