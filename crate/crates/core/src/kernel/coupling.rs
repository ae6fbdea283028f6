use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::io;
use crate::numerics::QuadratureGrid;

/// Tabulated samples may dip this far below zero (and are clamped to zero).
pub const NEGATIVE_SAMPLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingFamily {
    /// `f^2(w) = lambda^2 w exp(-w/cutoff)`
    ExpCutoff,
    /// `f^2(w) = lambda^2 w exp(-w^2/cutoff^2)`
    GaussianCutoff,
    /// Samples of `f^2` with linear interpolation, zero outside the table.
    Tabulated,
}

impl CouplingFamily {
    pub fn name(self) -> &'static str {
        match self {
            CouplingFamily::ExpCutoff => "exp-cutoff",
            CouplingFamily::GaussianCutoff => "gaussian-cutoff",
            CouplingFamily::Tabulated => "tabulated",
        }
    }
}

impl std::str::FromStr for CouplingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp-cutoff" => Ok(CouplingFamily::ExpCutoff),
            "gaussian-cutoff" => Ok(CouplingFamily::GaussianCutoff),
            "tabulated" => Ok(CouplingFamily::Tabulated),
            other => Err(Error::Invalid(format!(
                "unknown coupling family `{other}` (expected exp-cutoff, gaussian-cutoff or tabulated)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    Exp { lambda: f64, cutoff: f64 },
    Gaussian { lambda: f64, cutoff: f64 },
    Table { omega: Vec<f64>, f2: Vec<f64> },
}

/// The reservoir coupling `f(w)`, stored through its square (the spectral
/// strength). Homogeneous: independent of position and time.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFunction {
    shape: Shape,
}

impl CouplingFunction {
    pub fn exp_cutoff(lambda: f64, cutoff: f64) -> Result<Self> {
        check_params(lambda, cutoff)?;
        Ok(Self {
            shape: Shape::Exp { lambda, cutoff },
        })
    }

    pub fn gaussian_cutoff(lambda: f64, cutoff: f64) -> Result<Self> {
        check_params(lambda, cutoff)?;
        Ok(Self {
            shape: Shape::Gaussian { lambda, cutoff },
        })
    }

    pub fn new(family: CouplingFamily, lambda: f64, cutoff: f64) -> Result<Self> {
        match family {
            CouplingFamily::ExpCutoff => Self::exp_cutoff(lambda, cutoff),
            CouplingFamily::GaussianCutoff => Self::gaussian_cutoff(lambda, cutoff),
            CouplingFamily::Tabulated => Err(Error::Invalid(
                "tabulated couplings are built from samples, not parameters".into(),
            )),
        }
    }

    /// Samples `(w_i, f^2(w_i))` with strictly increasing `w_i >= 0`.
    pub fn tabulated(omega: Vec<f64>, mut f2: Vec<f64>) -> Result<Self> {
        if omega.len() < 2 || omega.len() != f2.len() {
            return Err(Error::Invalid(
                "tabulated coupling needs at least two (omega, f2) samples".into(),
            ));
        }
        if omega[0] < 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "tabulated omega must be >= 0 and strictly increasing".into(),
            ));
        }
        for (w, v) in omega.iter().zip(f2.iter_mut()) {
            if !v.is_finite() || *v < -NEGATIVE_SAMPLE_TOL {
                return Err(Error::Positivity {
                    omega: *w,
                    value: *v,
                });
            }
            *v = v.max(0.0);
        }
        Ok(Self {
            shape: Shape::Table { omega, f2 },
        })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (omega, f2) = io::read_two_column(text, ["omega", "f2"])?;
        Self::tabulated(omega, f2)
    }

    pub(crate) fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn family(&self) -> CouplingFamily {
        match self.shape {
            Shape::Exp { .. } => CouplingFamily::ExpCutoff,
            Shape::Gaussian { .. } => CouplingFamily::GaussianCutoff,
            Shape::Table { .. } => CouplingFamily::Tabulated,
        }
    }

    /// Coupling strength; `None` for tabulated data.
    pub fn lambda(&self) -> Option<f64> {
        match self.shape {
            Shape::Exp { lambda, .. } | Shape::Gaussian { lambda, .. } => Some(lambda),
            Shape::Table { .. } => None,
        }
    }

    pub fn cutoff(&self) -> Option<f64> {
        match self.shape {
            Shape::Exp { cutoff, .. } | Shape::Gaussian { cutoff, .. } => Some(cutoff),
            Shape::Table { .. } => None,
        }
    }

    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.shape {
            Shape::Table { omega, f2 } => Some((omega, f2)),
            _ => None,
        }
    }

    /// True when `f^2` vanishes identically.
    pub fn is_zero(&self) -> bool {
        match &self.shape {
            Shape::Exp { lambda, .. } | Shape::Gaussian { lambda, .. } => *lambda == 0.0,
            Shape::Table { f2, .. } => f2.iter().all(|&v| v == 0.0),
        }
    }

    /// Spectral strength `f^2(w)`; zero for `w < 0`.
    pub fn f2(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return 0.0;
        }
        match &self.shape {
            Shape::Exp { lambda, cutoff } => lambda * lambda * omega * (-omega / cutoff).exp(),
            Shape::Gaussian { lambda, cutoff } => {
                let r = omega / cutoff;
                lambda * lambda * omega * (-r * r).exp()
            }
            Shape::Table { omega: w, f2 } => interpolate(w, f2, omega),
        }
    }

    /// `f(w) = sqrt(f^2(w))`, the non-negative root.
    pub fn f(&self, omega: f64) -> f64 {
        self.f2(omega).sqrt()
    }

    /// Upper end of the frequency integrals: 40 cutoffs for the exponential
    /// family, 8 for the Gaussian one, the last sample for tables.
    pub fn omega_max(&self) -> f64 {
        match &self.shape {
            Shape::Exp { cutoff, .. } => 40.0 * cutoff,
            Shape::Gaussian { cutoff, .. } => 8.0 * cutoff,
            Shape::Table { omega, .. } => *omega.last().expect("non-empty table"),
        }
    }

    /// Natural frequency scale of the family (cutoff, or table extent / 8).
    pub fn scale(&self) -> f64 {
        match &self.shape {
            Shape::Exp { cutoff, .. } | Shape::Gaussian { cutoff, .. } => *cutoff,
            Shape::Table { omega, .. } => omega.last().copied().unwrap_or(1.0) / 8.0,
        }
    }

    /// `int_0^inf f^2(w) dw`.
    pub fn total_strength(&self) -> f64 {
        self.tail_strength(0.0)
    }

    /// `int_b^inf f^2(w) dw`, in closed form.
    pub fn tail_strength(&self, b: f64) -> f64 {
        let b = b.max(0.0);
        match &self.shape {
            Shape::Exp { lambda, cutoff } => {
                lambda * lambda * cutoff * (b + cutoff) * (-b / cutoff).exp()
            }
            Shape::Gaussian { lambda, cutoff } => {
                let r = b / cutoff;
                0.5 * lambda * lambda * cutoff * cutoff * (-r * r).exp()
            }
            Shape::Table { omega, f2 } => {
                let mut s = 0.0;
                for i in 0..omega.len() - 1 {
                    let (lo, hi) = (omega[i].max(b), omega[i + 1]);
                    if hi > lo {
                        s += 0.5 * (hi - lo) * (interpolate(omega, f2, lo) + f2[i + 1]);
                    }
                }
                s
            }
        }
    }

    /// Composite Gauss–Legendre grid on `[0, omega_max]` that resolves both
    /// the family's shape and oscillations `cos(w u)` up to `u = max_osc`.
    /// Table samples are always panel boundaries.
    pub fn omega_grid(&self, max_osc: f64) -> Result<QuadratureGrid> {
        const ORDER: usize = 12;
        let top = self.omega_max();
        let osc_panels = (top * max_osc.max(0.0) / (2.0 * PI)).ceil() as usize;
        match &self.shape {
            Shape::Table { omega, .. } => {
                let mut breaks = Vec::new();
                if omega[0] > 0.0 {
                    breaks.push(0.0);
                }
                let per = (osc_panels / (omega.len() - 1)).max(1);
                for w in omega.windows(2) {
                    for j in 0..per {
                        breaks.push(w[0] + (w[1] - w[0]) * j as f64 / per as f64);
                    }
                }
                breaks.push(top);
                QuadratureGrid::from_breakpoints(&breaks, ORDER)
            }
            _ => {
                let shape_panels = (4.0 * top / self.scale()).ceil() as usize;
                QuadratureGrid::composite(shape_panels.max(osc_panels).max(16), ORDER, 0.0, top)
            }
        }
    }

    /// Panel boundaries on `[0, omega_max]` on which `f^2` is smooth and
    /// well resolved by an order-12 rule: half-cutoff steps for the
    /// families, the samples themselves for tables.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Table { omega, .. } => {
                let mut b = Vec::with_capacity(omega.len() + 1);
                if omega[0] > 0.0 {
                    b.push(0.0);
                }
                b.extend_from_slice(omega);
                b
            }
            _ => {
                let top = self.omega_max();
                let n = (2.0 * top / self.scale()).ceil() as usize;
                (0..=n).map(|i| top * i as f64 / n as f64).collect()
            }
        }
    }

    /// Writes `omega,f2` rows at the given frequencies.
    pub fn to_csv(&self, omegas: &[f64]) -> String {
        let f2: Vec<f64> = omegas.iter().map(|&w| self.f2(w)).collect();
        io::write_two_column(["omega", "f2"], omegas, &f2)
    }
}

fn check_params(lambda: f64, cutoff: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(domain(
            "CouplingFunction",
            format!("lambda must be finite and >= 0, got {lambda}"),
        ));
    }
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(domain(
            "CouplingFunction",
            format!("cutoff must be finite and > 0, got {cutoff}"),
        ));
    }
    Ok(())
}

/// Piecewise-linear interpolation with zero outside `[x_0, x_n]`.
pub(crate) fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if n == 0 || at < x[0] || at > x[n - 1] {
        return 0.0;
    }
    let i = match x.binary_search_by(|v| v.total_cmp(&at)) {
        Ok(i) => return y[i],
        Err(i) => i,
    };
    let (x0, x1) = (x[i - 1], x[i]);
    let s = (at - x0) / (x1 - x0);
    y[i - 1] + s * (y[i] - y[i - 1])
}
