use std::f64::consts::FRAC_1_PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernel::CouplingFunction;
use crate::numerics::legendre_rule;
use crate::response::Dispersion;

/// Noise density over `|Im gamma~|` on shell. In density form (one mode,
/// one frequency) it is `1/pi`; conventions that fold `2 pi` factors of
/// the Fourier transforms of `J+-` into the spectrum give `4 pi` instead.
pub const FDT_DENSITY_RATIO: f64 = FRAC_1_PI;

/// Vacuum spectral weight of the noise current at wavenumber `k`, frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectralDensity {
    pub k: f64,
    pub omega: f64,
    pub value: f64,
}

/// `f^2(w') / (2 w')` with `w' = sqrt(omega^2 - k^2)`, zero below the light line.
pub fn noise_spectral_density(
    f: &CouplingFunction,
    k: f64,
    omega: f64,
) -> Result<NoiseSpectralDensity> {
    if !(omega.is_finite() && omega > 0.0 && k.is_finite()) {
        return Err(domain(
            "noise_spectral_density",
            format!("need omega > 0 and finite k, got ({k}, {omega})"),
        ));
    }
    let ak = k.abs();
    if omega == ak {
        return Err(domain(
            "noise_spectral_density",
            format!("omega = |k| = {ak} is the integrable edge singularity; integrate across it with noise_power"),
        ));
    }
    let value = if omega < ak {
        0.0
    } else {
        let w = ((omega - ak) * (omega + ak)).sqrt();
        f.f2(w) / (2.0 * w)
    };
    Ok(NoiseSpectralDensity { k, omega, value })
}

/// `int_{|k|}^inf S(k, omega) d omega`, with `omega = |k| cosh(th)` so the
/// inverse square root at the light line drops out: `S d omega = f^2(|k| sinh th) / 2 d th`.
pub fn noise_power(f: &CouplingFunction, k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(domain("noise_power", format!("k must be finite, got {k}")));
    }
    let ak = k.abs();
    let (x, w) = legendre_rule(12)?;
    let breaks = f.breakpoints();
    let mut total = 0.0;
    for b in breaks.windows(2) {
        let (lo, hi) = if ak == 0.0 {
            (b[0], b[1])
        } else {
            ((b[0] / ak).asinh(), (b[1] / ak).asinh())
        };
        let (half, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let v = mid + half * xi;
            s += wi
                * if ak == 0.0 {
                    if v == 0.0 {
                        0.0
                    } else {
                        f.f2(v) / (2.0 * v)
                    }
                } else {
                    0.5 * f.f2(ak * v.sinh())
                };
        }
        total += half * s;
    }
    Ok(total)
}

/// Both sides of the fluctuation–dissipation relation at one `(k, omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdtSample {
    pub k: f64,
    pub omega: f64,
    /// noise spectral density
    pub lhs: f64,
    /// `|Im gamma~(k, -i omega)|` at the matched reservoir frequency
    pub rhs: f64,
    pub ratio: f64,
}

pub fn fdt_check(f: &CouplingFunction, k: f64, omega: f64) -> Result<FdtSample> {
    if !(k.is_finite() && omega.is_finite() && omega > k.abs() + 1e-6) {
        return Err(domain(
            "fdt_check",
            format!("need omega > |k| + 1e-6, got k = {k}, omega = {omega}"),
        ));
    }
    let ak = k.abs();
    let w = ((omega - ak) * (omega + ak)).sqrt();
    let lhs = noise_spectral_density(f, k, omega)?.value;
    let rhs = Dispersion::new(f, k)?.on_shell(w)?.imag_part.abs();
    if rhs == 0.0 {
        return Err(domain(
            "fdt_check",
            format!("the coupling vanishes at w' = {w}; the ratio is undefined"),
        ));
    }
    Ok(FdtSample {
        k,
        omega,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp11() -> CouplingFunction {
        CouplingFunction::exp_cutoff(1.0, 1.0).unwrap()
    }

    #[test]
    fn below_light_line_and_decoupled() {
        let f = exp11();
        assert_eq!(noise_spectral_density(&f, 2.0, 1.5).unwrap().value, 0.0);
        assert_eq!(noise_spectral_density(&f, -2.0, 1.5).unwrap().value, 0.0);
        let free = CouplingFunction::exp_cutoff(0.0, 1.0).unwrap();
        assert_eq!(noise_spectral_density(&free, 0.5, 1.5).unwrap().value, 0.0);
        assert!(noise_spectral_density(&f, 1.5, 1.5).is_err());
        assert!(noise_spectral_density(&f, 0.0, 0.0).is_err());
    }

    #[test]
    fn value_matches_a_binned_mode_sum() {
        let f = exp11();
        let s = noise_spectral_density(&f, 0.0, 1.0).unwrap().value;
        assert!((s - (-1f64).exp() / 2.0).abs() < 1e-15);
        // Noise power of the reservoir modes whose frequency falls within
        // eta of omega, divided by the bin width.
        let eta = 1e-3;
        let grid = QuadratureGrid::composite(200, 12, 1.0 - eta, 1.0 + eta).unwrap();
        let binned = integrate(|w| f.f2(w) / (2.0 * w), &grid).unwrap() / (2.0 * eta);
        assert!((binned - s).abs() < 1e-6 * s, "{binned} vs {s}");
    }

    #[test]
    fn spectrum_integrates_to_the_mode_sum() {
        // int S d omega over the light-line edge equals the equal-time
        // noise power int f^2 / (2 w_k) dw of the mode expansion.
        for f in [
            exp11(),
            CouplingFunction::gaussian_cutoff(0.7, 2.0).unwrap(),
        ] {
            let grid = f.omega_grid(0.0).unwrap();
            for &k in &[0.0, 0.4, 1.5] {
                let direct = integrate(|w| f.f2(w) / (2.0 * w.hypot(k)), &grid).unwrap();
                let p = noise_power(&f, k).unwrap();
                assert!(
                    (p - direct).abs() < 1e-10 * direct,
                    "k = {k}: {p} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn spectral_positivity() {
        let f = CouplingFunction::gaussian_cutoff(1.3, 0.8).unwrap();
        for i in 1..200 {
            let omega = 0.05 * i as f64;
            for &k in &[0.0, 0.3, 1.0, 2.5] {
                if omega != k {
                    assert!(noise_spectral_density(&f, k, omega).unwrap().value >= 0.0);
                }
            }
        }
    }

    #[test]
    fn ratio_is_constant() {
        let f = exp11();
        let a = fdt_check(&f, 0.0, 1.0).unwrap().ratio;
        let b = fdt_check(&f, 0.5, 1.3).unwrap().ratio;
        assert!((a - b).abs() < 1e-6 * a);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ratios = Vec::new();
        for _ in 0..10 {
            let k: f64 = rng.random_range(-2.0..2.0);
            let omega = k.abs() + rng.random_range(0.1..3.0);
            ratios.push(fdt_check(&f, k, omega).unwrap().ratio);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!((hi - lo) / lo < 1e-5, "{lo} {hi}");
        assert!((lo - FDT_DENSITY_RATIO).abs() < 1e-12);
    }

    #[test]
    fn ratio_ignores_coupling_strength() {
        let a = fdt_check(&CouplingFunction::exp_cutoff(0.7, 1.2).unwrap(), 0.3, 0.9).unwrap();
        let b = fdt_check(&CouplingFunction::exp_cutoff(1.4, 1.2).unwrap(), 0.3, 0.9).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-12);
        assert!((b.lhs / a.lhs - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_holds_at_the_light_line() {
        let f = exp11();
        let plateau = fdt_check(&f, 0.8, 2.0).unwrap().ratio;
        for &gap in &[1e-1, 1e-2, 1e-3] {
            let s = fdt_check(&f, 0.8, 0.8 + gap).unwrap();
            assert!((s.ratio - plateau).abs() < 1e-4 * plateau);
        }
        assert!(fdt_check(&f, 0.8, 0.8).is_err());
    }
}
