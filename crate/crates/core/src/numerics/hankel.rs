//! Order-zero Hankel transform `H[g](w) = int_0^inf u g(u) J0(w u) du`.

use super::bessel::{j0, j1};
use super::quadrature::{integrate, QuadratureGrid};
use crate::error::{domain, Error, Result};

/// Relative size of the neglected tail above which [`hankel0_forward`] refuses.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Transform over the grid domain only. The tail beyond the domain is
/// estimated from the endpoint envelope and must be below
/// [`DEFAULT_TAIL_TOL`] relative to the result.
pub fn hankel0_forward<G: Fn(f64) -> f64>(g: G, grid: &QuadratureGrid, omega: f64) -> Result<f64> {
    hankel0_forward_with(g, grid, omega, DEFAULT_TAIL_TOL)
}

pub fn hankel0_forward_with<G: Fn(f64) -> f64>(
    g: G,
    grid: &QuadratureGrid,
    omega: f64,
    tail_tol: f64,
) -> Result<f64> {
    check_omega(omega)?;
    let value = integrate(|u| u * g(u) * j0(omega * u), grid)?;
    let tail = tail_envelope(&g, grid.domain().1, omega);
    if tail > tail_tol * value.abs() && tail > f64::MIN_POSITIVE {
        return Err(Error::Convergence {
            op: "hankel0_forward",
            msg: format!(
                "tail estimate {tail:e} beyond u = {} exceeds {tail_tol:e} of |result| = {:e}; extend the grid",
                grid.domain().1,
                value.abs()
            ),
        });
    }
    Ok(value)
}

/// Transform over the grid domain plus an asymptotic correction for the
/// tail `[b, inf)`, obtained by integrating by parts against
/// `d(u J1(w u))/du = w u J0(w u)` and `d(J0(w u))/du = -w J1(w u)`:
///
/// `int_b^inf u g J0 du ~ -b g J1/w - b g' J0/w^2 + (g' + b g'') J1/w^3
///                        + (g'' + b g''' - g'/b) J0/w^4`
///
/// with everything evaluated at `b` (`J` at `w b`). The derivatives come
/// from a five-point stencil of step `TAIL_STEP * b`. At `w = 0` a
/// power-law tail `g ~ u^-p` fitted at `b` is integrated instead (requires
/// `p > 2`).
pub fn hankel0_with_tail<G: Fn(f64) -> f64>(
    g: G,
    grid: &QuadratureGrid,
    omega: f64,
) -> Result<f64> {
    check_omega(omega)?;
    let body = integrate(|u| u * g(u) * j0(omega * u), grid)?;
    Ok(body + tail_correction(&g, grid.domain().1, omega))
}

/// Stencil step for the endpoint derivatives, relative to `b`.
pub(crate) const TAIL_STEP: f64 = 1e-2;

/// Offsets of the five stencil points, in units of the step.
pub(crate) const TAIL_STENCIL: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

pub(crate) fn tail_correction<G: Fn(f64) -> f64>(g: &G, b: f64, omega: f64) -> f64 {
    let h = TAIL_STEP * b;
    tail_terms(b, TAIL_STENCIL.map(|k| g(b + k * h)), omega)
}

/// Tail estimate from `g` sampled at `b + k h`, `k = -2..=2`, `h = TAIL_STEP * b`.
pub(crate) fn tail_terms(b: f64, g: [f64; 5], omega: f64) -> f64 {
    let gb = g[2];
    if gb == 0.0 {
        return 0.0;
    }
    let h = TAIL_STEP * b;
    let d1 = (g[0] - 8.0 * g[1] + 8.0 * g[3] - g[4]) / (12.0 * h);
    let d2 = (-g[0] + 16.0 * g[1] - 30.0 * g[2] + 16.0 * g[3] - g[4]) / (12.0 * h * h);
    let d3 = (-g[0] + 2.0 * g[1] - 2.0 * g[3] + g[4]) / (2.0 * h * h * h);
    if omega > 0.0 {
        let x = omega * b;
        let (j0b, j1b) = (j0(x), j1(x));
        let w2 = omega * omega;
        -b * gb * j1b / omega - b * d1 * j0b / w2
            + (d1 + b * d2) * j1b / (w2 * omega)
            + (d2 + b * d3 - d1 / b) * j0b / (w2 * w2)
    } else {
        let p = -b * d1 / gb;
        if p > 2.0 {
            b * b * gb / (p - 2.0)
        } else {
            f64::INFINITY
        }
    }
}

fn tail_envelope<G: Fn(f64) -> f64>(g: &G, b: f64, omega: f64) -> f64 {
    let hb = (b * g(b)).abs();
    if omega > 0.0 {
        let env = (2.0 / (std::f64::consts::PI * omega * b)).sqrt().min(1.0);
        hb * env / omega
    } else {
        hb * b
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(domain(
            "hankel0",
            format!("omega must be finite and >= 0, got {omega}"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(b: f64, panels: usize) -> QuadratureGrid {
        QuadratureGrid::composite(panels, 12, 0.0, b).unwrap()
    }

    #[test]
    fn gaussian_at_zero() {
        let v = hankel0_forward(|u| (-0.5 * u * u).exp(), &grid(14.0, 40), 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn algebraic_pair_at_unit_frequency() {
        // int u (1+u^2)^-3/2 J0(u) du = e^-1; the u^-2 tail forces a long domain.
        let g = |u: f64| (1.0 + u * u).powf(-1.5);
        let mut breaks: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
        breaks.extend((0..=9995).map(|i| 10.0 + 2.0 * i as f64));
        let grid = QuadratureGrid::from_breakpoints(&breaks, 12).unwrap();
        let v = hankel0_forward(g, &grid, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-7, "{v}");
    }

    #[test]
    fn short_domain_is_refused_without_tail_model() {
        let g = |u: f64| (1.0 + u * u).powf(-1.5);
        let err = hankel0_forward(g, &grid(50.0, 100), 1.0).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn tail_correction_recovers_short_domain() {
        let g = |u: f64| (1.0 + u * u).powf(-1.5);
        for &w in &[0.25, 1.0, 3.0] {
            let v = hankel0_with_tail(g, &grid(100.0, 400), w).unwrap();
            assert!((v - (-w).exp()).abs() < 1e-7, "w = {w}: {v}");
        }
    }

    #[test]
    fn zero_function() {
        for &w in &[0.0, 0.3, 7.0] {
            assert_eq!(hankel0_forward(|_| 0.0, &grid(10.0, 10), w).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_frequency_is_domain_error() {
        assert!(matches!(
            hankel0_forward(|_| 1.0, &grid(1.0, 1), -1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn gaussian_is_self_reciprocal() {
        let g = |u: f64| (-0.5 * u * u).exp();
        let gr = grid(14.0, 60);
        let once = |w: f64| hankel0_forward(g, &gr, w).unwrap();
        for &u in &[0.0, 0.5, 1.0, 2.0, 3.5] {
            let twice = hankel0_forward(once, &gr, u).unwrap();
            assert!((twice - g(u)).abs() < 1e-6, "u = {u}: {twice}");
        }
    }
}
