use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::kernel::CouplingFunction;
use crate::numerics::{integrate_complex, legendre_rule, QuadratureGrid};

const ORDER: usize = 12;

/// `gamma~(k, s) = -int_0^inf f^2(w) / (s^2 + w^2 + k^2) dw` on a caller-supplied grid.
pub fn gamma_tilde(
    f: &CouplingFunction,
    k: f64,
    s: Complex64,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    check_point("gamma_tilde", k, s)?;
    let c2 = s * s + k * k;
    Ok(-integrate_complex(|w| f.f2(w) / (c2 + w * w), grid)?)
}

fn check_point(op: &'static str, k: f64, s: Complex64) -> Result<()> {
    if !k.is_finite() {
        return Err(domain(op, format!("k must be finite, got {k}")));
    }
    if !(s.re > 0.0 && s.re.is_finite() && s.im.is_finite()) {
        return Err(domain(op, format!("need finite s with Re s > 0, got {s}")));
    }
    Ok(())
}

/// One evaluation of the transformed susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub k: f64,
    pub s: Complex64,
    pub value: Complex64,
    pub m: f64,
}

impl DispersionSample {
    /// `D = s^2 + k^2 + m^2 + gamma~`
    pub fn denominator(&self) -> Complex64 {
        self.s * self.s + self.k * self.k + self.m * self.m + self.value
    }
}

/// Undamped pole pair `+-i frequency` of `1/D` below the reservoir threshold;
/// `alpha` carries `amplitude * sin(frequency t)` for all time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMode {
    pub frequency: f64,
    pub amplitude: f64,
}

/// `gamma~(k, .)` for one coupling and wavenumber.
///
/// The integrand has a pole at `w = -i sqrt(s^2 + k^2)`, which approaches
/// the real axis as `Re s -> 0`. Panels are bisected until none is wider
/// than its distance to the pole, so the cost grows only logarithmically.
#[derive(Debug, Clone)]
pub struct Dispersion {
    f: CouplingFunction,
    k: f64,
    breaks: Vec<f64>,
    rule: (Vec<f64>, Vec<f64>),
}

impl Dispersion {
    pub fn new(f: &CouplingFunction, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(domain("Dispersion", format!("k must be finite, got {k}")));
        }
        Ok(Self {
            f: f.clone(),
            k,
            breaks: f.breakpoints(),
            rule: legendre_rule(ORDER)?,
        })
    }

    pub fn coupling(&self) -> &CouplingFunction {
        &self.f
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gamma_tilde(&self, s: Complex64) -> Result<Complex64> {
        check_point("gamma_tilde", self.k, s)?;
        if self.f.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let c2 = s * s + self.k * self.k;
        let c = c2.sqrt();
        let pole = (c.im.abs(), c.re);
        let mut acc = Complex64::new(0.0, 0.0);
        for w in self.breaks.windows(2) {
            self.panel(
                w[0],
                w[1],
                pole,
                &mut |x| self.f.f2(x) / (c2 + x * x),
                &mut acc,
            );
        }
        Ok(-acc)
    }

    fn panel<F: FnMut(f64) -> Complex64>(
        &self,
        lo: f64,
        hi: f64,
        pole: (f64, f64),
        g: &mut F,
        acc: &mut Complex64,
    ) {
        let (p, d) = pole;
        let gap = (lo - p).max(p - hi).max(0.0);
        if hi - lo > gap.hypot(d) {
            let mid = if p > lo && p < hi && p - lo > 0.1 * (hi - lo) && hi - p > 0.1 * (hi - lo) {
                p
            } else {
                0.5 * (lo + hi)
            };
            self.panel(lo, mid, pole, g, acc);
            self.panel(mid, hi, pole, g, acc);
            return;
        }
        let (half, centre) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        let (x, w) = &self.rule;
        let mut s = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(w) {
            s += g(centre + half * xi) * *wi;
        }
        *acc += s * half;
    }

    pub fn sample(&self, s: Complex64, m: f64) -> Result<DispersionSample> {
        Ok(DispersionSample {
            k: self.k,
            s,
            value: self.gamma_tilde(s)?,
            m,
        })
    }

    /// `D(s) = s^2 + k^2 + m^2 + gamma~(k, s)`
    pub fn denominator(&self, s: Complex64, m: f64) -> Result<Complex64> {
        Ok(s * s + self.k * self.k + m * m + self.gamma_tilde(s)?)
    }

    /// The real zero of `D` in `Re s > 0`, when the mode is unstable.
    ///
    /// `D` has no complex zeros in the right half-plane (`Im D` carries the
    /// sign of `Re s Im s`) and is increasing on the positive real axis, so
    /// a sign change is searched for on `[1e-9, inf)` and bisected. Growth
    /// rates below `1e-9` are reported as stable.
    pub fn growth_rate(&self, m: f64) -> Result<Option<f64>> {
        let d = |s: f64| -> Result<f64> { Ok(self.denominator(Complex64::new(s, 0.0), m)?.re) };
        let mut lo = 1e-9;
        if d(lo)? >= 0.0 {
            return Ok(None);
        }
        let mut hi = 1.0;
        while d(hi)? < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-15 * hi {
            let mid = 0.5 * (lo + hi);
            if d(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(hi))
    }

    /// The undamped oscillation left behind by a stable mode with `k != 0`.
    ///
    /// On the imaginary axis below threshold, `D(iy) = k^2 - y^2 + m^2 -
    /// int f^2/(w^2 + k^2 - y^2)` falls from `D(0) > 0` to `-inf` at `y = |k|`
    /// (the integral diverges logarithmically when `f^2 ~ w`), so `1/D` has a
    /// pair of poles at `+-i y0` and `alpha` keeps a component
    /// `sin(y0 t) / (y0 (1 + int f^2/(w^2 + k^2 - y0^2)^2))`. Roots closer to
    /// threshold than double precision resolves are reported as `None`;
    /// their amplitude is negligible.
    pub fn bound_mode(&self, m: f64) -> Result<Option<BoundMode>> {
        let k = self.k.abs();
        if k == 0.0 || self.f.is_zero() || self.growth_rate(m)?.is_some() {
            return Ok(None);
        }
        let d = |y: f64| -> f64 {
            let c2 = k * k - y * y;
            k * k - y * y + m * m - self.real_integral(c2.sqrt(), |w| self.f.f2(w) / (w * w + c2))
        };
        let mut lo = 0.0;
        let mut hi = k * (1.0 - 4.0 * f64::EPSILON);
        if d(hi) >= 0.0 {
            return Ok(None);
        }
        while hi - lo > 4.0 * f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if d(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let y0 = 0.5 * (lo + hi);
        let c2 = k * k - y0 * y0;
        let slope = self.real_integral(c2.sqrt(), |w| self.f.f2(w) / (w * w + c2).powi(2));
        Ok(Some(BoundMode {
            frequency: y0,
            amplitude: 1.0 / (y0 * (1.0 + slope)),
        }))
    }

    fn real_integral<F: Fn(f64) -> f64>(&self, pole_distance: f64, g: F) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut gc = |x: f64| Complex64::new(g(x), 0.0);
        for w in self.breaks.windows(2) {
            self.panel(w[0], w[1], (0.0, pole_distance), &mut gc, &mut acc);
        }
        acc.re
    }

    /// Integral of `g` over the dispersion's panels with `w0` as an extra
    /// boundary, graded towards the origin like a pole at `-w0` (`g` may
    /// behave like `1/(w + w0)`).
    pub(crate) fn integrate_split<F: FnMut(f64) -> f64>(&self, w0: f64, mut g: F) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let origin = (-w0, 0.0);
        let mut gc = |x: f64| Complex64::new(g(x), 0.0);
        for w in self.breaks.windows(2) {
            if w[0] < w0 && w0 < w[1] {
                self.panel(w[0], w0, origin, &mut gc, &mut acc);
                self.panel(w0, w[1], origin, &mut gc, &mut acc);
            } else {
                self.panel(w[0], w[1], origin, &mut gc, &mut acc);
            }
        }
        acc.re
    }

    pub(crate) fn top(&self) -> f64 {
        *self.breaks.last().expect("non-empty breakpoints")
    }
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
        let d = Dispersion::new(&f, 0.7).unwrap();
        assert_eq!(
            d.gamma_tilde(Complex64::new(0.3, 2.0)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let grid = f.omega_grid(0.0).unwrap();
        assert_eq!(
            gamma_tilde(&f, 1.0, Complex64::new(1.0, 0.0), &grid)
                .unwrap()
                .norm(),
            0.0
        );
    }

    #[test]
    fn real_point_matches_adaptive_oracle() {
        // -int w e^{-w} / (1 + w^2) dw, with the tail beyond 60 below 1e-24
        let oracle = -simpson(&|w: f64| w * (-w).exp() / (1.0 + w * w), 0.0, 60.0, 1e-13);
        let f = exp11();
        let grid = f.omega_grid(0.0).unwrap();
        let v = gamma_tilde(&f, 0.0, Complex64::new(1.0, 0.0), &grid).unwrap();
        assert!(
            (v.re - oracle).abs() < 1e-9 && v.im == 0.0,
            "{v} vs {oracle}"
        );
        let v = Dispersion::new(&f, 0.0)
            .unwrap()
            .gamma_tilde(Complex64::new(1.0, 0.0))
            .unwrap();
        assert!((v.re - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn large_s_bound() {
        let f = exp11();
        let v = Dispersion::new(&f, 0.0)
            .unwrap()
            .gamma_tilde(Complex64::new(100.0, 0.0))
            .unwrap();
        assert!(v.norm() <= 1.0001e-4, "{v}");
    }

    #[test]
    fn real_axis_values_are_negative() {
        for f in [
            exp11(),
            CouplingFunction::gaussian_cutoff(0.5, 2.0).unwrap(),
        ] {
            for &k in &[0.0, 0.5, 2.0] {
                let d = Dispersion::new(&f, k).unwrap();
                for &s in &[1e-3, 0.1, 1.0, 10.0] {
                    let v = d.gamma_tilde(Complex64::new(s, 0.0)).unwrap();
                    assert!(v.re <= 0.0 && v.im == 0.0);
                }
            }
        }
    }

    #[test]
    fn refined_panels_agree_with_a_fine_grid_near_the_axis() {
        let f = exp11();
        let d = Dispersion::new(&f, 0.5).unwrap();
        let s = Complex64::new(0.05, 1.7);
        // pole near w = 1.62 at distance ~0.05; 2000 uniform panels resolve it
        let fine = QuadratureGrid::composite(4000, 12, 0.0, 40.0).unwrap();
        let a = gamma_tilde(&f, 0.5, s, &fine).unwrap();
        let b = d.gamma_tilde(s).unwrap();
        assert!((a - b).norm() < 1e-11, "{a} vs {b}");
    }

    #[test]
    fn unstable_long_wavelength_mode() {
        // gamma~(0, s) diverges like log s as s -> 0, so the k = 0 mode
        // always has a real growth rate; at k = 1 it is stable.
        let f = exp11();
        let s = Dispersion::new(&f, 0.0)
            .unwrap()
            .growth_rate(1.0)
            .unwrap()
            .unwrap();
        assert!((s - 0.2692).abs() < 1e-4, "{s}");
        let d = Dispersion::new(&f, 0.0)
            .unwrap()
            .denominator(Complex64::new(s, 0.0), 1.0)
            .unwrap();
        assert!(d.norm() < 1e-12);
        assert!(Dispersion::new(&f, 1.0)
            .unwrap()
            .growth_rate(1.0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn rejects_imaginary_axis() {
        let f = exp11();
        assert!(Dispersion::new(&f, 0.0)
            .unwrap()
            .gamma_tilde(Complex64::new(0.0, 1.0))
            .is_err());
        let grid = f.omega_grid(0.0).unwrap();
        assert!(gamma_tilde(&f, 0.0, Complex64::new(-1.0, 0.0), &grid).is_err());
    }

    pub(crate) fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(
            f,
            a,
            b,
            fa,
            fm,
            fb,
            (b - a) / 6.0 * (fa + 4.0 * fm + fb),
            eps,
            40,
        )
    }
}
