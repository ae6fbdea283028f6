use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dispersion::Dispersion;
use crate::error::{domain, Error, Result};
use crate::io::Table;
use crate::kernel::CouplingFunction;
use crate::numerics::{
    integrate, inverse_laplace, LaplaceInversionConfig, LaplaceMethod, QuadratureGrid,
};

/// `|alpha|` beyond this aborts the Volterra integration.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Response functions of one mode: `alpha = L^-1[1/D]`, `beta = L^-1[s/D]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResponse {
    pub k: f64,
    pub m: f64,
    pub times: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ModeResponse {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t,alpha,beta`
    pub fn to_csv(&self) -> String {
        let mut t = Table::new(&["t", "alpha", "beta"]);
        for i in 0..self.len() {
            t.push(vec![self.times[i], self.alpha[i], self.beta[i]]);
        }
        t.to_csv()
    }

    /// Deterministic part of the field mode: `beta phi0 + alpha pi0`.
    pub fn propagate(&self, phi0: Complex64, pi0: Complex64) -> Vec<Complex64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| phi0 * b + pi0 * a)
            .collect()
    }
}

/// `gamma_k(t) = -int f^2(w) sin(w_k t) / w_k dw`, `w_k = sqrt(w^2 + k^2)`.
pub fn mode_kernel(f: &CouplingFunction, k: f64, t: f64, grid: &QuadratureGrid) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0 && k.is_finite()) {
        return Err(domain(
            "mode_kernel",
            format!("need finite k and t >= 0, got k = {k}, t = {t}"),
        ));
    }
    let v = integrate(
        |w| {
            let wk = w.hypot(k);
            if wk == 0.0 {
                f.f2(w) * t
            } else {
                f.f2(w) * (wk * t).sin() / wk
            }
        },
        grid,
    )?;
    Ok(-v)
}

/// `gamma_k(j h)` for `j = 0..=n`. Phases advance by complex rotation,
/// re-anchored to exact `sin`/`cos` every 256 steps.
pub fn mode_kernel_series(
    f: &CouplingFunction,
    k: f64,
    h: f64,
    n: usize,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite() && k.is_finite()) {
        return Err(domain(
            "mode_kernel_series",
            format!("need finite k and h > 0, got k = {k}, h = {h}"),
        ));
    }
    const ANCHOR: usize = 256;
    let mut out = vec![0.0; n + 1];
    for (w, wt) in grid.iter() {
        let f2 = f.f2(w);
        if f2 == 0.0 {
            continue;
        }
        let wk = w.hypot(k);
        if wk == 0.0 {
            for (j, o) in out.iter_mut().enumerate() {
                *o -= wt * f2 * j as f64 * h;
            }
            continue;
        }
        let c = wt * f2 / wk;
        let (sr, cr) = (wk * h).sin_cos();
        let rot = Complex64::new(cr, sr);
        let mut z = Complex64::new(1.0, 0.0);
        for (j, o) in out.iter_mut().enumerate() {
            if j % ANCHOR == 0 {
                let (s, co) = (wk * h * j as f64).sin_cos();
                z = Complex64::new(co, s);
            }
            *o -= c * z.im;
            z *= rot;
        }
    }
    if let Some(j) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            op: "mode_kernel_series",
            at: format!("t = {}", j as f64 * h),
        });
    }
    Ok(out)
}

/// Settings of the time-domain route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Also solve with `dt / 2` and combine the two (both solutions carry
    /// an even error expansion in `dt`, so this removes the `dt^2` term).
    pub extrapolate: bool,
}

impl VolterraConfig {
    /// Largest admissible step, `0.01 / sqrt(k^2 + m^2 + |g(0)|)`, rounded
    /// down so that 0.1 is a whole number of steps.
    pub fn for_mode(f: &CouplingFunction, k: f64, m: f64, t_max: f64) -> Self {
        let guard = max_step(f, k, m);
        let per = (0.1 / guard).ceil();
        Self {
            dt: 0.1 / per,
            t_max,
            extrapolate: true,
        }
    }
}

/// `0.01 / sqrt(k^2 + m^2 + |g(0)|)` with `g(0) = -1/2 int f^2`.
pub fn max_step(f: &CouplingFunction, k: f64, m: f64) -> f64 {
    0.01 / (k * k + m * m + 0.5 * f.total_strength()).sqrt()
}

/// Solves `alpha'' + (k^2+m^2) alpha + int_0^t gamma_k(t-t') alpha(t') dt' = 0`,
/// `alpha(0) = 0`, `alpha'(0) = 1`, `beta = alpha'`, by the implicit
/// trapezoid rule with the memory integral on the same trapezoid grid.
pub fn mode_response_volterra(
    f: &CouplingFunction,
    k: f64,
    m: f64,
    cfg: &VolterraConfig,
) -> Result<ModeResponse> {
    if !(m > 0.0 && m.is_finite() && k.is_finite()) {
        return Err(domain(
            "mode_response_volterra",
            format!("need m > 0 and finite k, got m = {m}, k = {k}"),
        ));
    }
    let guard = max_step(f, k, m);
    if !(cfg.dt > 0.0 && cfg.dt <= guard * (1.0 + 1e-12)) {
        return Err(domain(
            "mode_response_volterra",
            format!("dt = {} exceeds the resolution guard {guard:.6e}", cfg.dt),
        ));
    }
    if !(cfg.t_max > 0.0 && cfg.t_max.is_finite()) {
        return Err(domain(
            "mode_response_volterra",
            format!("t_max must be > 0, got {}", cfg.t_max),
        ));
    }
    let n = (cfg.t_max / cfg.dt - 1e-9).ceil() as usize;
    let grid = f.omega_grid(n as f64 * cfg.dt)?;
    let omega2 = k * k + m * m;
    let times: Vec<f64> = (0..=n).map(|j| j as f64 * cfg.dt).collect();
    let (alpha, beta) = if cfg.extrapolate {
        let fine_kernel = mode_kernel_series(f, k, 0.5 * cfg.dt, 2 * n, &grid)?;
        let coarse_kernel: Vec<f64> = fine_kernel.iter().step_by(2).copied().collect();
        let (a1, b1) = trapezoid(&coarse_kernel, cfg.dt, omega2)?;
        let (a2, b2) = trapezoid(&fine_kernel, 0.5 * cfg.dt, omega2)?;
        let mix = |c: &[f64], f: &[f64]| -> Vec<f64> {
            c.iter()
                .zip(f.iter().step_by(2))
                .map(|(c, f)| (4.0 * f - c) / 3.0)
                .collect()
        };
        (mix(&a1, &a2), mix(&b1, &b2))
    } else {
        let kernel = mode_kernel_series(f, k, cfg.dt, n, &grid)?;
        trapezoid(&kernel, cfg.dt, omega2)?
    };
    Ok(ModeResponse {
        k,
        m,
        times,
        alpha,
        beta,
    })
}

fn trapezoid(kernel: &[f64], h: f64, omega2: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    driven_trapezoid(kernel, None, h, omega2, (0.0, 1.0))
}

/// Implicit trapezoid for `x'' + omega2 x + int_0^t kernel(t-t') x(t') dt' = source`
/// from `(x, x')(0) = start`; returns `x` and `x'` on the kernel's grid.
fn driven_trapezoid(
    kernel: &[f64],
    source: Option<&[f64]>,
    h: f64,
    omega2: f64,
    start: (f64, f64),
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = kernel.len() - 1;
    let mut x = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    (x[0], v[0]) = start;
    let drive = |i: usize| source.map_or(0.0, |s| s[i]);
    // kernel[0] = 0, so the memory integral at step i needs x only up to i - 1
    let mut mem_prev = 0.0;
    let lhs = 2.0 / h + 0.5 * h * omega2;
    for i in 1..=n {
        let mut mem = 0.5 * kernel[i] * x[0];
        for j in 1..i {
            mem += kernel[i - j] * x[j];
        }
        mem *= h;
        let rhs = 2.0 * x[i - 1] / h + 2.0 * v[i - 1]
            - 0.5 * h * omega2 * x[i - 1]
            - 0.5 * h * (mem_prev + mem)
            + 0.5 * h * (drive(i - 1) + drive(i));
        x[i] = rhs / lhs;
        v[i] = 2.0 * (x[i] - x[i - 1]) / h - v[i - 1];
        mem_prev = mem;
        let size = x[i].abs();
        if !(size <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence {
                op: "mode_response_volterra",
                value: size,
                limit: DIVERGENCE_LIMIT,
                t: i as f64 * h,
            });
        }
    }
    Ok((x, v))
}

/// Driven mode equation on a grid of step `h` with `n` steps, solved at `h`
/// and `h/2` and extrapolated. `kernel` and `source` are sampled at `h/2`
/// (length `2n + 1`). Returns `x` at the `n + 1` coarse nodes.
pub(crate) fn driven_mode(
    kernel: &[f64],
    source: &[f64],
    h: f64,
    omega2: f64,
    start: (f64, f64),
) -> Result<Vec<f64>> {
    let coarse = |v: &[f64]| -> Vec<f64> { v.iter().step_by(2).copied().collect() };
    let (x1, _) = driven_trapezoid(&coarse(kernel), Some(&coarse(source)), h, omega2, start)?;
    let (x2, _) = driven_trapezoid(kernel, Some(source), 0.5 * h, omega2, start)?;
    Ok(x1
        .iter()
        .zip(x2.iter().step_by(2))
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}

/// `alpha`, `beta` at the given times by numerical inversion of `1/D` and
/// `s/D`, `D = s^2 + k^2 + m^2 + gamma~(k, s)`.
///
/// Only the de Hoog method is accepted: `gamma~` has branch cuts along the
/// imaginary axis from `+-ik` to `+-i inf`, which any Talbot contour must
/// cross. The Bromwich abscissa is raised to the mode's growth rate when it
/// is unstable, and `node_count` is raised at late times when it is too
/// small for the free frequency `sqrt(k^2 + m^2)`.
pub fn mode_response_laplace(
    f: &CouplingFunction,
    k: f64,
    m: f64,
    cfg: &LaplaceInversionConfig,
    times: &[f64],
) -> Result<ModeResponse> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(domain(
            "mode_response_laplace",
            format!("m must be > 0, got {m}"),
        ));
    }
    if cfg.method == LaplaceMethod::Talbot {
        return Err(domain(
            "mode_response_laplace",
            "the Talbot contour crosses the branch cut of gamma~ on the imaginary axis; use de-hoog",
        ));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(domain(
            "mode_response_laplace",
            format!("times must be > 0, got {t}"),
        ));
    }
    let disp = Dispersion::new(f, k)?;
    let growth = disp.growth_rate(m)?.unwrap_or(0.0);
    let cfg = cfg.with_abscissa(cfg.abscissa.max(growth));
    let omega = k.hypot(m);
    let rows = times
        .par_iter()
        .map(|&t| {
            let mut at = cfg;
            at.node_count = at.node_count.max(terms_for(omega, t));
            invert_pair(&disp, m, &at, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let (alpha, beta) = rows.into_iter().unzip();
    Ok(ModeResponse {
        k,
        m,
        times: times.to_vec(),
        alpha,
        beta,
    })
}

/// The de Hoog series has period `2t`, so it needs about `2 omega t / pi`
/// terms to resolve an oscillation at `omega`; 25% extra plus a fixed margin.
fn terms_for(omega: f64, t: f64) -> usize {
    2 * (2.5 * omega * t / PI).ceil() as usize + 32
}

fn invert_pair(
    disp: &Dispersion,
    m: f64,
    cfg: &LaplaceInversionConfig,
    t: f64,
) -> Result<(f64, f64)> {
    // Both inversions sample D at the same abscissae.
    let cache: RefCell<HashMap<(u64, u64), Complex64>> = RefCell::new(HashMap::new());
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inv_d = |s: Complex64| -> Complex64 {
        let key = (s.re.to_bits(), s.im.to_bits());
        if let Some(v) = cache.borrow().get(&key) {
            return *v;
        }
        let v = match disp.denominator(s, m) {
            Ok(d) => d.inv(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, f64::NAN)
            }
        };
        cache.borrow_mut().insert(key, v);
        v
    };
    let a = inverse_laplace(inv_d, cfg, t);
    let b = inverse_laplace(|s| s * inv_d(s), cfg, t);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((a?, b?))
}
