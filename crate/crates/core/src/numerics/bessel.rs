//! Bessel functions of the first kind, orders zero and one.
//!
//! [`j0`] and [`j1`] are the fast paths used inside quadrature loops, with
//! absolute error below 5e-14 everywhere. Three regimes:
//!
//! - `|x| <= 8`: the ascending power series (largest term ~114, so the
//!   cancellation loss stays near 1e-14).
//! - `8 < |x| < 30`: Bessel's integral `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt`
//!   by the trapezoid rule, which converges geometrically for periodic
//!   integrands once the node count exceeds `x/2` by a margin.
//! - `|x| >= 30`: Hankel's asymptotic expansion, truncated at the smallest term
//!   (which is below 1e-20 for this range).
//!
//! [`bessel_j0`] and [`bessel_j1`] redo the work in double-double arithmetic
//! (power series up to 30, asymptotic expansion beyond) and round once, so
//! their results are almost always correctly rounded. Neighbouring values
//! are then smooth enough for finite differences of step 1e-4.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::ddouble::{self as dd, Dd};
use crate::error::{domain, Result};

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 30.0;

/// `J0(x)`, returning a domain error for non-finite input.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("bessel_j0", format!("non-finite argument {x}")));
    }
    Ok(precise(x, 0))
}

/// `J1(x)`, returning a domain error for non-finite input.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("bessel_j1", format!("non-finite argument {x}")));
    }
    let v = precise(x.abs(), 1);
    Ok(if x < 0.0 { -v } else { v })
}

/// Unchecked `J0`; NaN in, NaN out.
#[inline]
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax, 0)
    } else if ax < ASYMPTOTIC_LIMIT {
        bessel_integral(ax, 0)
    } else if ax.is_finite() {
        asymptotic(ax, 0)
    } else {
        f64::NAN
    }
}

/// Unchecked `J1`; odd in `x`.
#[inline]
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(ax, 1)
    } else if ax < ASYMPTOTIC_LIMIT {
        bessel_integral(ax, 1)
    } else if ax.is_finite() {
        asymptotic(ax, 1)
    } else {
        return f64::NAN;
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn series(x: f64, order: u32) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, mut sum) = if order == 0 {
        (1.0, 1.0)
    } else {
        (0.5 * x, 0.5 * x)
    };
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * (kf + order as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn bessel_integral(x: f64, order: u32) -> f64 {
    // Trapezoid error is ~2 J_{2n}(x); n = x/2 + 25 pushes that below 1e-20.
    let n = (0.5 * x).ceil() as usize + 25;
    let h = PI / n as f64;
    let nu = order as f64;
    let end = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut sum = 0.5 * (1.0 + end);
    for i in 1..n {
        let t = i as f64 * h;
        sum += (nu * t - x * t.sin()).cos();
    }
    sum / n as f64
}

fn asymptotic(x: f64, order: u32) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        let mag = a.abs();
        if mag > last {
            break;
        }
        last = mag;
        // k odd feeds Q with sign (-1)^((k-1)/2), k even feeds P with sign (-1)^(k/2).
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if mag < 1e-20 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // chi = x - (order/2 + 1/4) pi
    let (cos_chi, sin_chi) = if order == 0 {
        (FRAC_1_SQRT_2 * (c + s), FRAC_1_SQRT_2 * (s - c))
    } else {
        (FRAC_1_SQRT_2 * (s - c), -FRAC_1_SQRT_2 * (s + c))
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn precise(x: f64, order: u32) -> f64 {
    precise_dd(x, order).to_f64()
}

fn precise_dd(x: f64, order: u32) -> Dd {
    let ax = x.abs();
    if ax <= ASYMPTOTIC_LIMIT {
        dd_series(ax, order)
    } else {
        dd_asymptotic(ax, order)
    }
}

/// Ascending series; the largest term at x = 30 is ~1e11, far inside
/// the 32-digit budget.
fn dd_series(x: f64, order: u32) -> Dd {
    let q = dd::two_prod(x, x) * Dd::from(-0.25);
    let mut term = if order == 0 {
        Dd::from(1.0)
    } else {
        Dd::from(0.5 * x)
    };
    let mut sum = term;
    for k in 1..200u32 {
        let denom = (k * (k + order)) as f64;
        term = term * q / Dd::from(denom);
        sum = sum + term;
        if term.0.abs() < 1e-36 && k as f64 > 0.5 * x {
            break;
        }
    }
    sum
}

fn dd_asymptotic(x: f64, order: u32) -> Dd {
    let mu = 4.0 * (order * order) as f64;
    let xd = Dd::from(x);
    let mut p = Dd::from(1.0);
    let mut q = Dd::from(0.0);
    let mut a = Dd::from(1.0);
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        a = a * Dd::from(mu - odd * odd) / (dd::two_prod(8.0 * k as f64, x));
        let mag = a.0.abs();
        if mag > last {
            break;
        }
        last = mag;
        match k % 4 {
            1 => q = q + a,
            2 => p = p - a,
            3 => q = q - a,
            _ => p = p + a,
        }
        if mag < 1e-36 {
            break;
        }
    }
    let (s, c) = dd_sin_cos(x);
    let (cos_chi, sin_chi) = if order == 0 {
        (dd::FRAC_1_SQRT_2 * (c + s), dd::FRAC_1_SQRT_2 * (s - c))
    } else {
        (dd::FRAC_1_SQRT_2 * (s - c), -(dd::FRAC_1_SQRT_2 * (s + c)))
    };
    let amp = (Dd::from(2.0) / (dd::PI * xd)).sqrt();
    amp * (p * cos_chi - q * sin_chi)
}

fn dd_sin_cos(x: f64) -> (Dd, Dd) {
    let n = (x / dd::HALF_PI[0]).round();
    // x - n pi/2 with pi/2 carried to ~100 bits
    let r = Dd::from(x)
        - dd::two_prod(n, dd::HALF_PI[0])
        - dd::two_prod(n, dd::HALF_PI[1])
        - Dd::from(n * dd::HALF_PI[2]);
    let r2 = r * r;
    let mut sin = r;
    let mut cos = Dd::from(1.0);
    let mut ts = r;
    let mut tc = Dd::from(1.0);
    for k in 1..30u32 {
        let kf = k as f64;
        ts = -(ts * r2) / Dd::from((2.0 * kf) * (2.0 * kf + 1.0));
        tc = -(tc * r2) / Dd::from((2.0 * kf - 1.0) * (2.0 * kf));
        sin = sin + ts;
        cos = cos + tc;
        if tc.0.abs() < 1e-36 {
            break;
        }
    }
    match (n as i64).rem_euclid(4) {
        0 => (sin, cos),
        1 => (cos, -sin),
        2 => (-sin, -cos),
        _ => (-cos, sin),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: 50-term power series with Kahan summation.
    fn series_oracle(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut comp = 0.0f64;
        for k in 1..50 {
            term *= q / ((k * k) as f64);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    #[test]
    fn j0_at_origin_is_one() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        assert_eq!(j1(0.0), 0.0);
    }

    #[test]
    fn first_zero_of_j0() {
        // bisection on the independent series for the zero location
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series_oracle(lo) * series_oracle(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let zero = 0.5 * (lo + hi);
        assert!((zero - 2.404825557695773).abs() < 1e-13);
        assert!(bessel_j0(2.404825557695773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn j0_at_ten_matches_series() {
        let v = bessel_j0(10.0).unwrap();
        assert!((v - series_oracle(10.0)).abs() < 1e-10, "{v}");
        assert!((v - (-0.245_935_764_451_348_3)).abs() < 1e-13);
    }

    #[test]
    fn regimes_join_continuously() {
        for order in [0, 1] {
            let x = SERIES_LIMIT;
            assert!((series(x, order) - bessel_integral(x, order)).abs() < 1e-14);
            let x = ASYMPTOTIC_LIMIT;
            assert!((bessel_integral(x, order) - asymptotic(x, order)).abs() < 1e-14);
        }
    }

    // 25-digit values from an arbitrary-precision library.
    #[allow(clippy::excessive_precision)]
    const REFERENCE: [(f64, f64, f64); 6] = [
        (
            0.5,
            0.9384698072408129042284047,
            0.2422684576748738863839546,
        ),
        (
            1.0,
            0.7651976865579665514497175,
            0.4400505857449335159596822,
        ),
        (
            5.0,
            -0.177596771314338304347397,
            -0.3275791375914652220377343,
        ),
        (
            50.0,
            0.05581232766925181500475048,
            -0.09751182812517513766145895,
        ),
        (
            100.0,
            0.01998585030422312242422839,
            -0.07714535201411215803268549,
        ),
        (
            1234.5,
            -0.01355037961803572190942791,
            0.01821750833739249827031831,
        ),
    ];

    #[test]
    fn precise_path_is_correctly_rounded_at_reference_points() {
        for (x, v0, v1) in REFERENCE {
            assert_eq!(bessel_j0(x).unwrap(), v0, "J0({x})");
            assert_eq!(bessel_j1(x).unwrap(), v1, "J1({x})");
        }
    }

    #[test]
    fn fast_path_tracks_precise_path() {
        for i in 0..4000 {
            let x = 1e-3 * (1e7f64).powf(i as f64 / 4000.0);
            let e0 = (j0(x) - bessel_j0(x).unwrap()).abs();
            let e1 = (j1(x) - bessel_j1(x).unwrap()).abs();
            assert!(e0 < 5e-14 && e1 < 5e-14, "x = {x}: {e0:e} {e1:e}");
        }
    }

    #[test]
    fn j1_is_minus_derivative_of_j0() {
        for &x in &[0.3, 2.0, 7.9, 8.1, 15.0, 29.9, 30.1, 77.0] {
            let h = 1e-5;
            let d = (j0(x + h) - j0(x - h)) / (2.0 * h);
            assert!((d + j1(x)).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn ode_residual() {
        // The stencil runs on the unrounded double-double values: rounding
        // J0 to f64 alone moves the second difference by up to
        // 2 ulp / h^2, which is 2e-8 at x = 0.5.
        let h = 1e-4;
        let j = |x: f64| precise_dd(x, 0);
        for &x in &[0.5, 1.0, 5.0, 50.0] {
            let (xp, xm) = (x + h, x - h);
            let (hp, hm) = (Dd::from(xp - x), Dd::from(x - xm));
            let (fp, f0, fm) = (j(xp), j(x), j(xm));
            let span = hp * hm * (hp + hm);
            let d1 = (hm * hm * (fp - f0) + hp * hp * (f0 - fm)) / span;
            let d2 = Dd::from(2.0) * (hm * (fp - f0) - hp * (f0 - fm)) / span;
            let r = (d2 + d1 / Dd::from(x) + f0).to_f64();
            assert!(r.abs() <= 1e-8, "x = {x}, residual {r:e}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }
}
