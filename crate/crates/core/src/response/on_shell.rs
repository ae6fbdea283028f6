use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dispersion::Dispersion;
use crate::error::{domain, Error, Result};
use crate::kernel::CouplingFunction;
use crate::numerics::QuadratureGrid;

/// Boundary value of `gamma~(k, s)` at `s = -i w_k`, `w_k = sqrt(k^2 + w^2)`,
/// approached from `Re s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnShellLimit {
    pub k: f64,
    pub omega: f64,
    /// `-P int f^2(w') / (w'^2 - w^2) dw'`
    pub pv_part: f64,
    /// `-pi f^2(w) / (2w)`
    pub imag_part: f64,
}

impl OnShellLimit {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.pv_part, self.imag_part)
    }

    pub fn omega_k(&self) -> f64 {
        self.k.hypot(self.omega)
    }
}

/// On-shell limit with the principal value taken on `grid`.
///
/// The pole is subtracted rather than excised:
/// `P int_a^b f^2/(w'^2-w^2) = int_a^b (f^2(w') - f^2(w))/(w'^2-w^2) + f^2(w) P int_a^b dw'/(w'^2-w^2)`,
/// where the first integrand is smooth and the second integral is a log.
pub fn on_shell_limit(
    f: &CouplingFunction,
    k: f64,
    omega: f64,
    grid: &QuadratureGrid,
) -> Result<OnShellLimit> {
    check(k, omega)?;
    let (a, b) = grid.domain();
    let f0 = f.f2(omega);
    let mut body = 0.0;
    for (w, wt) in grid.iter() {
        body += wt * subtracted(f, f0, omega, w);
    }
    finish(k, omega, f0, body + f0 * log_part(omega, a, b))
}

impl Dispersion {
    /// [`on_shell_limit`] on the dispersion's own panels, split at `omega`.
    pub fn on_shell(&self, omega: f64) -> Result<OnShellLimit> {
        check(self.k(), omega)?;
        let f = self.coupling();
        let f0 = f.f2(omega);
        let body = self.integrate_split(omega, |w| subtracted(f, f0, omega, w));
        finish(
            self.k(),
            omega,
            f0,
            body + f0 * log_part(omega, 0.0, self.top()),
        )
    }
}

fn check(k: f64, omega: f64) -> Result<()> {
    if !k.is_finite() {
        return Err(domain(
            "on_shell_limit",
            format!("k must be finite, got {k}"),
        ));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(domain(
            "on_shell_limit",
            format!("omega must be > 0 (the pole sits at the origin otherwise), got {omega}"),
        ));
    }
    Ok(())
}

fn subtracted(f: &CouplingFunction, f0: f64, omega: f64, w: f64) -> f64 {
    let d = w - omega;
    if d.abs() > 1e-6 * omega {
        (f.f2(w) - f0) / (d * (w + omega))
    } else {
        let h = 1e-4 * omega;
        (f.f2(omega + h) - f.f2(omega - h)) / (2.0 * h * 2.0 * omega)
    }
}

/// `P int_a^b dw' / (w'^2 - w^2)`
fn log_part(omega: f64, a: f64, b: f64) -> f64 {
    let prim = |x: f64| ((x - omega).abs() / (x + omega)).ln() / (2.0 * omega);
    prim(b) - prim(a)
}

fn finish(k: f64, omega: f64, f0: f64, pv: f64) -> Result<OnShellLimit> {
    let imag = -std::f64::consts::PI * f0 / (2.0 * omega);
    if !(pv.is_finite() && imag.is_finite()) {
        return Err(Error::Evaluation {
            op: "on_shell_limit",
            at: format!("omega = {omega}"),
        });
    }
    Ok(OnShellLimit {
        k,
        omega,
        pv_part: -pv,
        imag_part: imag,
    })
}
