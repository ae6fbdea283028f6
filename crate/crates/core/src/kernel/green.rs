use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::numerics::j0;

/// Retarded Green's function of a 1+1 Klein–Gordon field of mass `omega`:
/// `G(x,t) = -1/2 theta(t-|x|) J0(omega sqrt(t^2-x^2))`, with `theta(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirGreenFunction {
    omega: f64,
}

impl ReservoirGreenFunction {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(domain(
                "ReservoirGreenFunction",
                format!("omega must be finite and >= 0, got {omega}"),
            ));
        }
        Ok(Self { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        green_function(self.omega, x, t)
    }

    pub fn laplace(&self, x: f64, s: Complex64) -> Result<Complex64> {
        laplace_green(self.omega, x, s)
    }
}

pub fn green_function(omega: f64, x: f64, t: f64) -> Result<f64> {
    if !(omega.is_finite() && x.is_finite() && t.is_finite()) {
        return Err(domain(
            "green_function",
            format!("non-finite input ({omega}, {x}, {t})"),
        ));
    }
    if omega < 0.0 {
        return Err(domain(
            "green_function",
            format!("omega must be >= 0, got {omega}"),
        ));
    }
    if t < x.abs() {
        return Ok(0.0);
    }
    let u = ((t - x) * (t + x)).sqrt();
    Ok(-0.5 * j0(omega * u))
}

/// `int_0^inf e^{-st} G(x,t) dt = -exp(-r|x|) / (2r)`, `r = sqrt(s^2 + omega^2)`
/// on the principal branch.
pub fn laplace_green(omega: f64, x: f64, s: Complex64) -> Result<Complex64> {
    if !(omega.is_finite() && omega >= 0.0 && x.is_finite()) {
        return Err(domain(
            "laplace_green",
            format!("bad omega/x ({omega}, {x})"),
        ));
    }
    if !(s.re > 0.0) || !s.im.is_finite() || !s.re.is_finite() {
        return Err(domain("laplace_green", format!("need Re s > 0, got {s}")));
    }
    let r = (s * s + omega * omega).sqrt();
    Ok(-(-r * x.abs()).exp() / (2.0 * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureGrid};

    const FIRST_ZERO: f64 = 2.404825557695773;

    #[test]
    fn point_values() {
        assert_eq!(green_function(3.0, 0.0, 0.0).unwrap(), -0.5);
        assert_eq!(green_function(3.0, 0.0, 1e-300).unwrap(), -0.5);
        assert_eq!(green_function(1.0, 2.0, 1.0).unwrap(), 0.0);
        assert!(green_function(1.0, 0.0, FIRST_ZERO).unwrap().abs() < 1e-10);
        // on the cone itself
        assert_eq!(green_function(5.0, -1.5, 1.5).unwrap(), -0.5);
    }

    #[test]
    fn vanishes_before_the_cone_and_in_the_past() {
        for &(x, t) in &[(1.0, 0.999), (-3.0, 2.0), (0.0, -1e-9), (0.5, -2.0)] {
            assert_eq!(
                green_function(2.0, x, t).unwrap().to_bits(),
                0.0f64.to_bits()
            );
        }
    }

    #[test]
    fn laplace_values() {
        let v = laplace_green(0.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re + 0.5).abs() < 1e-15 && v.im == 0.0);
        let v = laplace_green(2.0, 0.0, Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.re + 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn laplace_matches_time_domain_quadrature() {
        // int_1^inf e^{-t} G_1(1,t) dt; e^{-45} is far below the tolerance.
        let grid = QuadratureGrid::composite(200, 16, 1.0, 46.0).unwrap();
        let q = integrate(|t| (-t).exp() * green_function(1.0, 1.0, t).unwrap(), &grid).unwrap();
        let v = laplace_green(1.0, 1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((q - v.re).abs() < 1e-7, "{q} vs {}", v.re);
    }

    #[test]
    fn rejects_left_half_plane_and_nan() {
        assert!(laplace_green(1.0, 0.0, Complex64::new(0.0, 1.0)).is_err());
        assert!(laplace_green(1.0, 0.0, Complex64::new(-1.0, 0.0)).is_err());
        assert!(green_function(1.0, f64::NAN, 1.0).is_err());
        assert!(ReservoirGreenFunction::new(-1.0).is_err());
    }

    #[test]
    fn klein_gordon_residual_off_the_cone() {
        let h = 1e-3;
        for &omega in &[0.0, 0.5, 1.0, 3.0] {
            let gf = ReservoirGreenFunction::new(omega).unwrap();
            let g = |x: f64, t: f64| gf.eval(x, t).unwrap();
            for &(x, t) in &[
                (0.0, 1.0),
                (0.3, 2.0),
                (-1.0, 4.5),
                (2.0, 2.5),
                (5.0, 3.0),
                (-0.7, 0.2),
            ] {
                let d2t = (g(x, t + h) - 2.0 * g(x, t) + g(x, t - h)) / (h * h);
                let d2x = (g(x + h, t) - 2.0 * g(x, t) + g(x - h, t)) / (h * h);
                let r = d2t - d2x + omega * omega * g(x, t);
                assert!(r.abs() <= 1e-4, "omega={omega} x={x} t={t}: {r:e}");
            }
        }
    }
}
