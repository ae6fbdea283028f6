//! Numerical inversion of the Laplace transform.
//!
//! Two independent routes:
//!
//! * **Talbot**: midpoint rule on Weideman's optimised contour
//!   `s(th) = (N/t)(-0.6122 + 0.5017 th cot(0.6407 th) + nu i th)`, `nu = 0.2645`.
//!   It needs `F` analytic to the right of the contour, which reaches into
//!   `Re s < 0`, and the contour must enclose every singularity; with
//!   `nu = 0.2645` it crosses the imaginary axis near `0.34 N / t`.
//! * **de Hoog**: Fourier series on the Bromwich line `Re s = gamma`
//!   accelerated by a quotient–difference Padé continued fraction. Only
//!   `F` on `Re s > abscissa` is used, so transforms with branch cuts on the
//!   imaginary axis are fine.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ddouble::CDd;
use crate::error::{domain, Error, Result};

/// Weideman's optimised slope for the cotangent contour.
pub const TALBOT_SLOPE: f64 = 0.2645;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplaceMethod {
    Talbot,
    DeHoog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceInversionConfig {
    pub method: LaplaceMethod,
    /// Talbot: contour nodes. de Hoog: `2M` with `2M + 1` transform samples.
    pub node_count: usize,
    /// Times outside this open interval are rejected.
    pub time_range: (f64, f64),
    /// Talbot only: imaginary slope `nu` of the contour. The default 0.2645
    /// suits singularities near the negative real axis; sustained
    /// oscillations `e^{i w t}` with large `w t` need a steeper contour (0.5)
    /// and more nodes.
    pub contour_slope: f64,
    /// de Hoog only: every singularity of `F` must satisfy `Re s < abscissa`.
    pub abscissa: f64,
    /// de Hoog only: target discretisation error of the Fourier series.
    pub tolerance: f64,
}

impl Default for LaplaceInversionConfig {
    fn default() -> Self {
        Self::talbot(32)
    }
}

impl LaplaceInversionConfig {
    pub fn talbot(node_count: usize) -> Self {
        Self {
            method: LaplaceMethod::Talbot,
            node_count,
            time_range: (1e-6, 1e6),
            contour_slope: TALBOT_SLOPE,
            abscissa: 0.0,
            tolerance: 1e-12,
        }
    }

    /// Talbot settings for undamped oscillations: slope 0.5, 96 nodes.
    pub fn talbot_oscillatory() -> Self {
        Self {
            contour_slope: 0.5,
            ..Self::talbot(96)
        }
    }

    pub fn de_hoog(node_count: usize) -> Self {
        Self {
            method: LaplaceMethod::DeHoog,
            ..Self::talbot(node_count)
        }
    }

    pub fn with_abscissa(mut self, abscissa: f64) -> Self {
        self.abscissa = abscissa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 16 {
            return Err(domain(
                "LaplaceInversionConfig",
                format!("node_count must be >= 16, got {}", self.node_count),
            ));
        }
        let (lo, hi) = self.time_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(domain(
                "LaplaceInversionConfig",
                format!("time range must satisfy 0 < lo < hi, got ({lo}, {hi})"),
            ));
        }
        if !(self.contour_slope > 0.0 && self.contour_slope < 1.0) {
            return Err(domain(
                "LaplaceInversionConfig",
                format!(
                    "contour slope must lie in (0, 1), got {}",
                    self.contour_slope
                ),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) || !self.abscissa.is_finite() {
            return Err(domain(
                "LaplaceInversionConfig",
                "tolerance/abscissa out of range",
            ));
        }
        Ok(())
    }
}

/// `f(t) = L^-1[F](t)` for real-valued `f`.
pub fn inverse_laplace<F>(f: F, cfg: &LaplaceInversionConfig, t: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    cfg.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("inverse_laplace", format!("t must be > 0, got {t}")));
    }
    if t < cfg.time_range.0 || t > cfg.time_range.1 {
        return Err(domain(
            "inverse_laplace",
            format!("t = {t} outside target range {:?}", cfg.time_range),
        ));
    }
    let checked = |s: Complex64| -> Result<Complex64> {
        let v = f(s);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                op: "inverse_laplace",
                at: format!("s = {s}"),
            })
        }
    };
    match cfg.method {
        LaplaceMethod::Talbot => talbot(checked, cfg.node_count, cfg.contour_slope, t),
        LaplaceMethod::DeHoog => {
            de_hoog(checked, cfg.node_count / 2, t, cfg.abscissa, cfg.tolerance)
        }
    }
}

fn talbot<F>(f: F, n: usize, nu: f64, t: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    const SIGMA: f64 = -0.6122;
    const MU: f64 = 0.5017;
    const ALPHA: f64 = 0.6407;
    let n = n + n % 2;
    let scale = n as f64 / t;
    let mut acc = 0.0;
    // Conjugate symmetry: only the upper half of the contour is evaluated.
    for k in n / 2..n {
        let th = -PI + (k as f64 + 0.5) * 2.0 * PI / n as f64;
        let (sa, ca) = (ALPHA * th).sin_cos();
        let cot = ca / sa;
        let s = Complex64::new(scale * (SIGMA + MU * th * cot), scale * nu * th);
        let ds = Complex64::new(scale * MU * (cot - ALPHA * th / (sa * sa)), scale * nu);
        let term = (s * t).exp() * f(s)? * ds;
        acc += term.im;
    }
    Ok(2.0 * acc / n as f64)
}

fn de_hoog<F>(f: F, m: usize, t: f64, abscissa: f64, tol: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let np = 2 * m + 1;
    let period = 2.0 * t;
    let gamma = abscissa - tol.ln() / (2.0 * period);
    let fp: Vec<CDd> = (0..np)
        .map(|k| f(Complex64::new(gamma, PI * k as f64 / period)).map(|v| CDd::new(v.re, v.im)))
        .collect::<Result<_>>()?;

    // The quotient-difference recursion loses most of its digits in plain
    // double precision; it runs in double-double.
    let zero = CDd::ZERO;
    let mut e = vec![vec![zero; m + 1]; np];
    let mut q = vec![vec![zero; m]; 2 * m];
    q[0][0] = fp[1] / fp[0].scale(0.5);
    for i in 1..2 * m {
        q[i][0] = fp[i + 1] / fp[i];
    }
    for r in 1..=m {
        let mr = 2 * (m - r) + 1;
        for i in 0..mr {
            e[i][r] = q[i + 1][r - 1] - q[i][r - 1] + e[i + 1][r - 1];
        }
        if r < m {
            for i in 0..mr {
                q[i][r] = q[i + 1][r - 1] * e[i + 1][r] / e[i][r];
            }
        }
    }
    let mut d = vec![zero; np];
    d[0] = fp[0].scale(0.5);
    for r in 1..=m {
        d[2 * r - 1] = -q[0][r - 1];
        d[2 * r] = -e[0][r];
    }

    // z = exp(i pi t / period) = i exactly.
    let z = CDd::I;
    let mut a = vec![zero; np + 1];
    let mut b = vec![CDd::ONE; np + 1];
    a[1] = d[0];
    for i in 1..2 * m {
        a[i + 1] = a[i] + d[i] * a[i - 1] * z;
        b[i + 1] = b[i] + d[i] * b[i - 1] * z;
    }
    let brem = (CDd::ONE + (d[2 * m - 1] - d[2 * m]) * z).scale(0.5);
    let rem = -brem * (CDd::ONE - (CDd::ONE + d[2 * m] * z / (brem * brem)).sqrt());
    a[np] = a[2 * m] + rem * a[2 * m - 1];
    b[np] = b[2 * m] + rem * b[2 * m - 1];

    let ratio = (a[np] / b[np]).re.to_f64();
    let value = (gamma * t).exp() / period * ratio;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            op: "inverse_laplace",
            at: format!("de Hoog continued fraction at t = {t}"),
        })
    }
}
