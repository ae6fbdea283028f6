use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kernel::CouplingFunction;
use crate::numerics::{legendre_rule, QuadratureGrid};
use crate::response::Dispersion;

const ORDER: usize = 12;

/// Resolution of the nested `(k, w)` quadrature of the steady correlator.
///
/// The `k` integral runs over `|k| <= k_max` in the rapidity `k = w sinh(th)`,
/// which absorbs the `1/w_k` peak at small `w`: steps of `rapidity_step` up
/// to `|k| = k_panel`, then panels of width `k_panel`. The correlator
/// depends on `k_max` (logarithmically at coincident points), so
/// convergence is judged at fixed `k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorGrids {
    pub k_max: f64,
    pub k_panel: f64,
    pub rapidity_step: f64,
    pub omega: QuadratureGrid,
}

impl CorrelatorGrids {
    /// `level` halves every panel once more: level 0 has `k` panels of 0.5,
    /// rapidity steps of 0.5 and `w` panels on the coupling's breakpoints,
    /// graded geometrically towards `w = 0` where the integrand behaves
    /// like `w log w`.
    pub fn new(f: &CouplingFunction, k_max: f64, level: u32) -> Result<Self> {
        if !(k_max > 0.0 && k_max.is_finite()) {
            return Err(domain(
                "CorrelatorGrids",
                format!("k_max must be > 0, got {k_max}"),
            ));
        }
        let base = f.breakpoints();
        let mut breaks = vec![0.0];
        breaks.extend((1..=24).rev().map(|j| base[1] * 0.5f64.powi(j)));
        breaks.extend_from_slice(&base[1..]);
        let split = 1usize << level;
        let mut fine = vec![0.0];
        for w in breaks.windows(2) {
            for j in 1..=split {
                fine.push(w[0] + (w[1] - w[0]) * j as f64 / split as f64);
            }
        }
        let scale = 0.5f64.powi(level as i32);
        Ok(Self {
            k_max,
            k_panel: 0.5 * scale,
            rapidity_step: 0.5 * scale,
            omega: QuadratureGrid::from_breakpoints(&fine, ORDER)?,
        })
    }
}

/// Large-time two-point function `<0|phi(x,t) phi(0,0)|0>` at one separation.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateCorrelator {
    pub dx: f64,
    pub dt: f64,
    pub value: Complex64,
    pub grids: CorrelatorGrids,
}

/// The `w`-dependent part of the correlator, `f^2(w) / |m^2 - w^2 + gamma~_on(w)|^2`,
/// tabulated once per grid so that many separations can be evaluated.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// `(w, quadrature weight * f^2 / |D|^2)`
    weights: Vec<(f64, f64)>,
    grids: CorrelatorGrids,
}

/// `|D|` below this at a node is an undamped resonance.
const RESONANCE_FLOOR: f64 = 1e-12;

impl SteadyState {
    pub fn new(f: &CouplingFunction, m: f64, grids: &CorrelatorGrids) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(domain(
                "steady_correlator",
                format!("m must be > 0, got {m}"),
            ));
        }
        let disp = Dispersion::new(f, 0.0)?;
        let nodes: Vec<(f64, f64)> = grids
            .omega
            .iter()
            .filter(|&(w, _)| w > 0.0 && f.f2(w) > 0.0)
            .collect();
        let weights = nodes
            .par_iter()
            .map(|&(w, wt)| {
                let on = disp.on_shell(w)?;
                let d = Complex64::new(m * m - w * w + on.pv_part, on.imag_part);
                let mag = d.norm();
                if mag < RESONANCE_FLOOR {
                    return Err(Error::Resonance {
                        omega: w,
                        magnitude: mag,
                    });
                }
                Ok((w, wt * f.f2(w) / (mag * mag)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights,
            grids: grids.clone(),
        })
    }

    /// `int dk/(2 pi 2 w_k) int dw f^2 / |D|^2 exp(i(k dx - w_k dt))`
    pub fn at(&self, dx: f64, dt: f64) -> Result<SteadyStateCorrelator> {
        if !(dx.is_finite() && dt.is_finite()) {
            return Err(domain(
                "steady_correlator",
                format!("separation must be finite, got ({dx}, {dt})"),
            ));
        }
        let (x, w) = legendre_rule(ORDER)?;
        let g = &self.grids;
        let k_panel = g.k_panel.min(0.25 * PI / (dx.abs() + dt.abs()).max(1e-300));
        let terms: Vec<Complex64> = self
            .weights
            .par_iter()
            .map(|&(om, c)| c * wightman(om, dx, dt, g.k_max, k_panel, g.rapidity_step, &x, &w))
            .collect();
        let value: Complex64 = terms.iter().sum();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Evaluation {
                op: "steady_correlator",
                at: format!("({dx}, {dt})"),
            });
        }
        Ok(SteadyStateCorrelator {
            dx,
            dt,
            value,
            grids: g.clone(),
        })
    }
}

pub fn steady_correlator(
    f: &CouplingFunction,
    m: f64,
    dx: f64,
    dt: f64,
    grids: &CorrelatorGrids,
) -> Result<SteadyStateCorrelator> {
    SteadyState::new(f, m, grids)?.at(dx, dt)
}

/// `int_{-K}^{K} dk / (4 pi w_k) exp(i(k x - w_k t))` for mass `w`, as
/// `(1/2pi) int_0^{asinh(K/w)} cos(w x sinh th) exp(-i w t cosh th) dth`.
#[allow(clippy::too_many_arguments)]
fn wightman(
    om: f64,
    x: f64,
    t: f64,
    k_max: f64,
    k_panel: f64,
    step: f64,
    gx: &[f64],
    gw: &[f64],
) -> Complex64 {
    let top = (k_max / om).asinh();
    let first = (k_panel / om).asinh().min(top);
    let mut breaks = Vec::new();
    let n0 = (first / step).ceil() as usize;
    breaks.extend((0..n0).map(|j| first * j as f64 / n0 as f64));
    let nk = (k_max / k_panel).ceil() as usize;
    let kp = k_max / nk as f64;
    breaks.extend((1..=nk).map(|j| ((j as f64 * kp) / om).asinh()));
    let mut acc = Complex64::new(0.0, 0.0);
    for b in breaks.windows(2) {
        let (half, mid) = (0.5 * (b[1] - b[0]), 0.5 * (b[1] + b[0]));
        let mut s = Complex64::new(0.0, 0.0);
        for (xi, wi) in gx.iter().zip(gw) {
            let th = mid + half * xi;
            let (sh, ch) = (th.sinh(), th.cosh());
            let (sn, cs) = (om * t * ch).sin_cos();
            s += Complex64::new(cs, -sn) * (wi * (om * x * sh).cos());
        }
        acc += s * half;
    }
    acc / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp11() -> CouplingFunction {
        CouplingFunction::exp_cutoff(1.0, 1.0).unwrap()
    }

    #[test]
    fn decoupled_is_zero() {
        let f = CouplingFunction::exp_cutoff(0.0, 1.0).unwrap();
        let g = CorrelatorGrids::new(&f, 40.0, 0).unwrap();
        assert_eq!(
            steady_correlator(&f, 1.0, 0.3, 0.2, &g).unwrap().value,
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn wightman_at_coincidence_is_the_log() {
        let (x, w) = legendre_rule(ORDER).unwrap();
        for &om in &[1e-6, 0.3, 5.0] {
            let v = wightman(om, 0.0, 0.0, 40.0, 0.5, 0.5, &x, &w);
            let exact = (40.0 / om).asinh() / (2.0 * PI);
            assert!((v.re - exact).abs() < 1e-13 * exact && v.im == 0.0);
        }
    }

    #[test]
    fn wightman_matches_plain_k_quadrature() {
        let (om, x, t) = (0.7f64, 0.9, 1.3);
        let grid = QuadratureGrid::composite(4000, 12, 0.0, 40.0).unwrap();
        let mut direct = Complex64::new(0.0, 0.0);
        for (k, wt) in grid.iter() {
            let wk = k.hypot(om);
            direct +=
                Complex64::from_polar(1.0, -wk * t) * (wt * 2.0 * (k * x).cos() / (4.0 * PI * wk));
        }
        let (gx, gw) = legendre_rule(ORDER).unwrap();
        let v = wightman(om, x, t, 40.0, 0.5, 0.5, &gx, &gw);
        assert!((v - direct).norm() < 1e-12, "{v} vs {direct}");
    }

    #[test]
    fn hermitian_and_positive() {
        let f = exp11();
        let g = CorrelatorGrids::new(&f, 40.0, 0).unwrap();
        let s = SteadyState::new(&f, 1.0, &g).unwrap();
        for &(dx, dt) in &[(0.5, 0.3), (-1.2, 2.0), (0.0, 1.0)] {
            let a = s.at(dx, dt).unwrap().value;
            let b = s.at(-dx, -dt).unwrap().value;
            assert!((a - b.conj()).norm() <= 1e-10, "{a} {b}");
        }
        let c = s.at(0.0, 0.0).unwrap().value;
        assert!(c.im == 0.0 && c.re > 0.0);
    }

    #[test]
    fn converges_under_grid_doubling() {
        let f = exp11();
        let coarse =
            SteadyState::new(&f, 1.0, &CorrelatorGrids::new(&f, 40.0, 0).unwrap()).unwrap();
        let fine = SteadyState::new(&f, 1.0, &CorrelatorGrids::new(&f, 40.0, 1).unwrap()).unwrap();
        for &(dx, dt) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 1.5)] {
            let a = coarse.at(dx, dt).unwrap().value;
            let b = fine.at(dx, dt).unwrap().value;
            assert!((a - b).norm() < 1e-4 * b.norm(), "({dx},{dt}): {a} {b}");
        }
    }
}
