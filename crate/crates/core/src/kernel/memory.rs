use std::f64::consts::PI;

use rayon::prelude::*;

use super::coupling::{interpolate, CouplingFunction, Shape};
use crate::error::{domain, Error, Result};
use crate::io;
use crate::numerics::{integrate, j0, tail_terms, QuadratureGrid, TAIL_STENCIL, TAIL_STEP};

/// Implied `f^2` below this (absolute) marks a kernel as non-dissipative.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Relative tail of `int f^2` beyond the grid that is still acceptable.
pub const MEMORY_TAIL_TOL: f64 = 1e-6;

/// `g(u) = -1/2 int_0^inf f^2(w) J0(w u) dw` by quadrature on `grid`.
pub fn memory_from_coupling(f: &CouplingFunction, u: f64, grid: &QuadratureGrid) -> Result<f64> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(domain(
            "memory_from_coupling",
            format!("u must be finite and >= 0, got {u}"),
        ));
    }
    let total = f.total_strength();
    let (a, b) = grid.domain();
    let missing = (total - f.tail_strength(a)) + f.tail_strength(b);
    if missing > MEMORY_TAIL_TOL * total {
        return Err(Error::Convergence {
            op: "memory_from_coupling",
            msg: format!(
                "grid [{a}, {b}] misses {:.3e} of int f^2; cover [0, {}]",
                missing / total,
                f.omega_max()
            ),
        });
    }
    Ok(-0.5 * integrate(|w| f.f2(w) * j0(w * u), grid)?)
}

/// [`memory_from_coupling`] on the coupling's own grid for this `u`.
pub fn memory_profile(f: &CouplingFunction, u: f64) -> Result<f64> {
    memory_from_coupling(f, u, &f.omega_grid(u)?)
}

/// `f^2(w) = -2 w int_0^inf u g(u) J0(w u) du` for an arbitrary profile. The
/// part of the integral beyond the grid is added from an asymptotic
/// expansion at the grid end, so the grid must reach into the smooth,
/// monotone tail of `g`.
pub fn coupling_from_profile<G: Fn(f64) -> f64>(
    g: G,
    omega: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let b = grid.domain().1;
    let tail = TAIL_STENCIL.map(|k| g(b + k * TAIL_STEP * b));
    let nodes: Vec<f64> = grid.nodes().iter().map(|&u| g(u)).collect();
    SampledProfile::new(grid, nodes, Some(tail))?.coupling_at(omega)
}

/// `f^2(w)` implied by a memory kernel; see [`coupling_from_profile`].
/// Tabulated kernels that end inside the grid need no tail.
pub fn coupling_from_memory(g: &MemoryKernel, omega: f64, grid: &QuadratureGrid) -> Result<f64> {
    let b = grid.domain().1;
    match g.extent() {
        Some(end) if end <= b => {
            let nodes: Vec<f64> = grid.nodes().iter().map(|&u| g.profile(u)).collect();
            SampledProfile::new(grid, nodes, None)?.coupling_at(omega)
        }
        _ => coupling_from_profile(|u| g.profile(u), omega, grid),
    }
}

/// A light-cone profile sampled once on a `u` grid, for evaluating the
/// inverse transform at many frequencies.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    nodes: Vec<f64>,
    /// `w_i u_i g(u_i)`
    moments: Vec<f64>,
    end: f64,
    tail: Option<[f64; 5]>,
}

impl SampledProfile {
    /// `values[i] = g(nodes[i])`; `tail` holds `g` at `b + k h`, `k = -2..=2`,
    /// `h = 1e-2 b`, when the profile continues past the grid end `b`.
    pub fn new(grid: &QuadratureGrid, values: Vec<f64>, tail: Option<[f64; 5]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(
                "one profile value per grid node required".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                op: "SampledProfile",
                at: format!("u = {}", grid.nodes()[i]),
            });
        }
        let moments = grid
            .iter()
            .zip(&values)
            .map(|((u, w), g)| w * u * g)
            .collect();
        Ok(Self {
            nodes: grid.nodes().to_vec(),
            moments,
            end: grid.domain().1,
            tail,
        })
    }

    /// Samples the numerical memory profile of `f` on `grid` (and at the
    /// tail stencil), in parallel over nodes.
    pub fn from_coupling(f: &CouplingFunction, grid: &QuadratureGrid) -> Result<Self> {
        let b = grid.domain().1;
        let mut points = grid.nodes().to_vec();
        points.extend(TAIL_STENCIL.map(|k| b + k * TAIL_STEP * b));
        let values = points
            .par_iter()
            .map(|&u| memory_profile(f, u))
            .collect::<Result<Vec<f64>>>()?;
        let n = grid.len();
        let tail = [
            values[n],
            values[n + 1],
            values[n + 2],
            values[n + 3],
            values[n + 4],
        ];
        Self::new(grid, values[..n].to_vec(), Some(tail))
    }

    pub fn coupling_at(&self, omega: f64) -> Result<f64> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(domain(
                "coupling_from_memory",
                format!("omega must be finite and >= 0, got {omega}"),
            ));
        }
        if omega == 0.0 {
            return Ok(0.0);
        }
        let body: f64 = self
            .nodes
            .iter()
            .zip(&self.moments)
            .map(|(&u, &m)| m * j0(omega * u))
            .sum();
        let tail = match self.tail {
            Some(g) => tail_terms(self.end, g, omega),
            None => 0.0,
        };
        let f2 = -2.0 * omega * (body + tail);
        if !f2.is_finite() {
            return Err(Error::Evaluation {
                op: "coupling_from_memory",
                at: format!("omega = {omega}"),
            });
        }
        if f2 < -POSITIVITY_TOL {
            return Err(Error::Positivity { omega, value: f2 });
        }
        Ok(f2)
    }
}

/// Grid for Hankel integrals of a profile of width `scale` against
/// `J0(w u)` with `w <= omega_max`, on `[0, extent]`. Panels grow with `u`
/// (the profiles decay smoothly) but never exceed half an oscillation.
pub fn profile_grid(scale: f64, omega_max: f64, extent: f64) -> Result<QuadratureGrid> {
    if !(scale > 0.0 && omega_max > 0.0 && extent > 0.0) {
        return Err(domain(
            "profile_grid",
            "scale, omega_max and extent must be > 0",
        ));
    }
    let wave = PI / omega_max;
    let mut breaks = vec![0.0];
    let mut u = 0.0;
    while u < extent {
        u += (0.25 * (scale + u)).min(wave);
        breaks.push(u.min(extent));
    }
    QuadratureGrid::from_breakpoints(&breaks, 12)
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Exp { lambda: f64, cutoff: f64 },
    Gaussian { lambda: f64, cutoff: f64 },
    Table { u: Vec<f64>, g: Vec<f64> },
}

/// The causal memory kernel `gamma(x,t) = theta(t-|x|) g(sqrt(t^2-x^2))`,
/// stored through its light-cone profile `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel {
    profile: Profile,
}

impl MemoryKernel {
    /// Closed-form profile of a built-in family; `None` for tabulated couplings.
    pub fn closed_form(f: &CouplingFunction) -> Option<Self> {
        let profile = match *f.shape() {
            Shape::Exp { lambda, cutoff } => Profile::Exp { lambda, cutoff },
            Shape::Gaussian { lambda, cutoff } => Profile::Gaussian { lambda, cutoff },
            Shape::Table { .. } => return None,
        };
        Some(Self { profile })
    }

    /// Closed form when available, otherwise the profile tabulated at `u`
    /// by quadrature.
    pub fn from_coupling(f: &CouplingFunction, u: &[f64]) -> Result<Self> {
        if let Some(k) = Self::closed_form(f) {
            return Ok(k);
        }
        let g = u
            .par_iter()
            .map(|&ui| memory_profile(f, ui))
            .collect::<Result<Vec<f64>>>()?;
        Self::tabulated(u.to_vec(), g)
    }

    /// Samples of `g` (ascending `u >= 0`), linearly interpolated and zero
    /// beyond the last sample. Rejected when the implied spectral strength
    /// is negative anywhere on a probe grid beyond what truncating the table
    /// can explain.
    pub fn tabulated(u: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if u.len() < 2 || u.len() != g.len() {
            return Err(Error::Invalid(
                "tabulated kernel needs at least two (u, gamma) samples".into(),
            ));
        }
        if u[0] < 0.0 || u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "tabulated u must be >= 0 and strictly increasing".into(),
            ));
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                op: "MemoryKernel::tabulated",
                at: format!("u = {}", u[i]),
            });
        }
        let kernel = Self {
            profile: Profile::Table { u, g },
        };
        kernel.check_dissipative()?;
        Ok(kernel)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (u, g) = io::read_two_column(text, ["u", "gamma"])?;
        Self::tabulated(u, g)
    }

    pub fn to_csv(&self, u: &[f64]) -> String {
        let g: Vec<f64> = u.iter().map(|&x| self.profile(x)).collect();
        io::write_two_column(["u", "gamma"], u, &g)
    }

    /// Last tabulated `u`; `None` for closed forms.
    pub fn extent(&self) -> Option<f64> {
        match &self.profile {
            Profile::Table { u, .. } => u.last().copied(),
            _ => None,
        }
    }

    /// Width of the profile near the origin.
    pub fn scale(&self) -> f64 {
        match &self.profile {
            Profile::Exp { cutoff, .. } | Profile::Gaussian { cutoff, .. } => 1.0 / cutoff,
            Profile::Table { u, .. } => {
                let n = u.len() - 1;
                (u[n] - u[0]) / n as f64 * 4.0
            }
        }
    }

    /// Light-cone profile `g(u)`; `g(-u) = g(u)`.
    pub fn profile(&self, u: f64) -> f64 {
        let u = u.abs();
        match &self.profile {
            Profile::Exp { lambda, cutoff } => {
                let a = 1.0 / cutoff;
                let r2 = a * a + u * u;
                -0.5 * lambda * lambda * a / (r2 * r2.sqrt())
            }
            Profile::Gaussian { lambda, cutoff } => {
                let z = cutoff * u;
                -0.25 * lambda * lambda * cutoff * cutoff * (-0.25 * z * z).exp()
            }
            Profile::Table { u: x, g } => interpolate(x, g, u),
        }
    }

    /// `gamma(x,t)`: bit-exact zero unless `t >= |x|`.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        if t >= x.abs() {
            self.profile(((t - x) * (t + x)).sqrt())
        } else {
            0.0
        }
    }

    /// Grid suitable for inverting this kernel at frequencies up to `omega_max`.
    pub fn inversion_grid(&self, omega_max: f64) -> Result<QuadratureGrid> {
        match &self.profile {
            Profile::Table { u, .. } => {
                let wave = PI / omega_max;
                let mut breaks = vec![u[0]];
                for w in u.windows(2) {
                    let n = ((w[1] - w[0]) / wave).ceil().max(1.0) as usize;
                    for j in 1..=n {
                        breaks.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
                    }
                }
                QuadratureGrid::from_breakpoints(&breaks, 8)
            }
            Profile::Exp { .. } => profile_grid(self.scale(), omega_max, 100.0 * self.scale()),
            Profile::Gaussian { .. } => profile_grid(self.scale(), omega_max, 14.0 * self.scale()),
        }
    }

    fn check_dissipative(&self) -> Result<()> {
        let Profile::Table { u, g } = &self.profile else {
            return Ok(());
        };
        let end = *u.last().expect("non-empty table");
        let step = u
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let top = (PI / step).min(400.0 / end.max(step));
        let grid = self.inversion_grid(top)?;
        let values: Vec<f64> = grid.nodes().iter().map(|&x| self.profile(x)).collect();
        let sampled = SampledProfile::new(&grid, values, None)?;
        // Two artefacts of the table itself can push the transform below
        // zero: cutting the profile at `end` (at most 2 |end g(end)|) and
        // linear interpolation, whose error is bounded per segment by
        // du^2 |g''| / 8.
        let truncation = 2.0 * (end * g[g.len() - 1]).abs();
        let curv = |j: usize| -> f64 {
            if j == 0 || j + 1 >= u.len() {
                return 0.0;
            }
            let (l, r) = (u[j] - u[j - 1], u[j + 1] - u[j]);
            (2.0 * ((g[j + 1] - g[j]) / r - (g[j] - g[j - 1]) / l) / (l + r)).abs()
        };
        let mut interp = 0.0;
        for i in 0..u.len() - 1 {
            let du = u[i + 1] - u[i];
            interp += 0.5 * (u[i] + u[i + 1]) * du * du * du * curv(i).max(curv(i + 1)) / 8.0;
        }
        for i in 1..=64 {
            let omega = top * i as f64 / 64.0;
            let allowance = POSITIVITY_TOL + truncation + 2.0 * omega * interp;
            match sampled.coupling_at(omega) {
                Ok(_) => {}
                Err(Error::Positivity { value, .. }) if value >= -allowance => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}
