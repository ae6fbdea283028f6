use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::response::{
    driven_mode, max_step, mode_kernel_series, mode_response_volterra, VolterraConfig,
};

use super::{Lattice, LatticeConfig, LatticeState, Trajectory};

/// Simulated against predicted Fourier coefficients.
///
/// `simulated` and `predicted` belong to `worst_mode`, the recorded mode with
/// the largest error; errors are `max_t |sim - pred| / max_t |pred|`.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub max_rel_err: f64,
    pub worst_mode: usize,
    pub times: Vec<f64>,
    pub simulated: Vec<Complex64>,
    pub predicted: Vec<Complex64>,
    /// `max_t |E_field,sim - E_field,pred| / E_field(0)`, quiescent runs only
    pub field_energy_gap: Option<f64>,
    pub trajectory: Trajectory,
}

fn relative_error(sim: &[Complex64], pred: &[Complex64]) -> f64 {
    let diff = sim
        .iter()
        .zip(pred)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = pred.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Reservoir at rest, probe mode excited as `cos(kx) + sin(kx)/2`; compared
/// with `beta phi(0) + alpha pi(0)` from the continuum memory kernel at the
/// lattice wavenumber `(2/dx) sin(k dx/2)`.
pub fn run_quiescent_comparison(cfg: &LatticeConfig) -> Result<Comparison> {
    cfg.validate()?;
    let q = cfg.probe_mode;
    let phi0 = Complex64::new(0.5, 0.0);
    let pi0 = Complex64::new(0.0, -0.25);
    let mut state = LatticeState::zeros(cfg);
    state.add_mode(cfg, q, phi0, pi0);
    let trajectory = Lattice::new(cfg, state)?.run()?;

    let k = cfg.lattice_wavenumber(q);
    let sub = (cfg.dt / max_step(&cfg.coupling, k, cfg.m)).ceil().max(1.0) as usize;
    let h = cfg.dt / sub as f64;
    let t_end = cfg.n_steps() as f64 * cfg.dt;
    let resp = mode_response_volterra(
        &cfg.coupling,
        k,
        cfg.m,
        &VolterraConfig {
            dt: h,
            t_max: t_end,
            extrapolate: true,
        },
    )?;
    let phi = resp.propagate(phi0, pi0);
    let index = |t: f64| ((t / h).round() as usize).min(phi.len() - 1);
    let velocity = |i: usize| -> Complex64 {
        match i {
            0 => pi0,
            i if i + 1 < phi.len() => (phi[i + 1] - phi[i - 1]) / (2.0 * h),
            i => (3.0 * phi[i] - 4.0 * phi[i - 1] + phi[i - 2]) / (2.0 * h),
        }
    };
    let omega2 = k * k + cfg.m * cfg.m;
    let length = cfg.length();
    let predicted: Vec<Complex64> = trajectory.times.iter().map(|t| phi[index(*t)]).collect();
    let field_pred: Vec<f64> = trajectory
        .times
        .iter()
        .map(|t| {
            let i = index(*t);
            length * (velocity(i).norm_sqr() + omega2 * phi[i].norm_sqr())
        })
        .collect();
    let e0 = trajectory.energy[0].field;
    let gap = trajectory
        .energy
        .iter()
        .zip(&field_pred)
        .map(|(e, p)| (e.field - p).abs())
        .fold(0.0, f64::max)
        / e0;
    let simulated = trajectory.amplitudes[0].clone();
    Ok(Comparison {
        max_rel_err: relative_error(&simulated, &predicted),
        worst_mode: q,
        times: trajectory.times.clone(),
        simulated,
        predicted,
        field_energy_gap: Some(gap),
        trajectory,
    })
}

/// Options of the noise-driven comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinSetup {
    /// overall factor on the reservoir variances
    pub noise_scale: f64,
    /// Fourier indices `1..=modes` are compared
    pub modes: usize,
    /// initial field coefficients `(q, phi_q, pi_q)`
    pub excite: Option<(usize, Complex64, Complex64)>,
}

impl Default for LangevinSetup {
    fn default() -> Self {
        Self {
            noise_scale: 1.0,
            modes: 8,
            excite: None,
        }
    }
}

pub fn run_langevin_comparison(cfg: &LatticeConfig, seed: u64) -> Result<Comparison> {
    run_langevin_comparison_with(cfg, seed, &LangevinSetup::default())
}

/// Samples the reservoir, runs the lattice, and solves for each compared
/// mode the driven equation
/// `phi'' + (k^2+m^2) phi + int gamma_k phi = J_k(t)`, where `gamma_k` is the
/// memory kernel of the lattice's own frequency grid and `J_k` is the force
/// of the freely evolving reservoir modes sampled by [`vacuum_state`].
pub fn run_langevin_comparison_with(
    cfg: &LatticeConfig,
    seed: u64,
    setup: &LangevinSetup,
) -> Result<Comparison> {
    cfg.validate()?;
    if setup.modes == 0 || setup.modes >= cfg.nx / 2 {
        return Err(domain(
            "run_langevin_comparison",
            format!("modes must lie in 1..{}", cfg.nx / 2),
        ));
    }
    let nx = cfg.nx;
    let half = nx / 2;
    let nodes = cfg.omega_grid.nodes();
    let weights = cfg.omega_grid.weights();
    let keff: Vec<f64> = (0..=half).map(|q| cfg.lattice_wavenumber(q)).collect();
    let (mut state, y0, v0) = sample_reservoir(cfg, seed, setup.noise_scale, setup.modes)?;
    if let Some((q, p, v)) = setup.excite {
        if q == 0 || q >= half {
            return Err(domain(
                "run_langevin_comparison",
                format!("excited mode {q} out of range"),
            ));
        }
        state.add_mode(cfg, q, p, v);
    }

    let mut modes: Vec<usize> = (1..=setup.modes).collect();
    if cfg.probe_mode > setup.modes {
        modes.push(cfg.probe_mode);
    }
    let trajectory = Lattice::new(cfg, state)?.run_recording(&modes)?;

    let steps = cfg.n_steps();
    let h = cfg.dt;
    let f: Vec<f64> = nodes.iter().map(|w| cfg.coupling.f(*w)).collect();
    let mut worst = (0.0, 1, Vec::new(), Vec::new());
    for (i, &q) in modes.iter().take(setup.modes).enumerate() {
        let k = keff[q];
        let kernel = mode_kernel_series(&cfg.coupling, k, 0.5 * h, 2 * steps, &cfg.omega_grid)?;
        let mut source = vec![Complex64::new(0.0, 0.0); 2 * steps + 1];
        for (j, &w) in nodes.iter().enumerate() {
            let wq = k.hypot(w);
            let c = weights[j] * f[j];
            for (n, s) in source.iter_mut().enumerate() {
                let (sn, cs) = (wq * 0.5 * h * n as f64).sin_cos();
                *s += c * (y0[i][j] * cs + v0[i][j] * (sn / wq));
            }
        }
        let (x0, p0) = match setup.excite {
            Some((e, x0, p0)) if e == q => (x0, p0),
            _ => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        let omega2 = k * k + cfg.m * cfg.m;
        let re: Vec<f64> = source.iter().map(|s| s.re).collect();
        let im: Vec<f64> = source.iter().map(|s| s.im).collect();
        let sol_re = driven_mode(&kernel, &re, h, omega2, (x0.re, p0.re))?;
        let sol_im = driven_mode(&kernel, &im, h, omega2, (x0.im, p0.im))?;
        let predicted: Vec<Complex64> = trajectory
            .times
            .iter()
            .map(|t| {
                let n = ((t / h).round() as usize).min(steps);
                Complex64::new(sol_re[n], sol_im[n])
            })
            .collect();
        let err = relative_error(&trajectory.amplitudes[i], &predicted);
        if err >= worst.0 || worst.2.is_empty() {
            worst = (err, q, trajectory.amplitudes[i].clone(), predicted);
        }
    }
    Ok(Comparison {
        max_rel_err: worst.0,
        worst_mode: worst.1,
        times: trajectory.times.clone(),
        simulated: worst.2,
        predicted: worst.3,
        field_energy_gap: None,
        trajectory,
    })
}

/// Lattice state with the field at rest and a seeded reservoir sample:
/// independent complex Gaussian coefficients with
/// `E|Y|^2 = s / (2 w_qj w_j L)` and `E|Y'|^2 = s w_qj / (2 w_j L)`,
/// `w_qj = sqrt(k_q^2 + w_j^2)`, for every wavenumber except `k = 0`.
pub fn vacuum_state(cfg: &LatticeConfig, seed: u64, noise_scale: f64) -> Result<LatticeState> {
    Ok(sample_reservoir(cfg, seed, noise_scale, 0)?.0)
}

type Coefficients = Vec<Vec<Complex64>>;

/// Also returns the coefficients of Fourier indices `1..=keep`, `[q-1][j]`.
fn sample_reservoir(
    cfg: &LatticeConfig,
    seed: u64,
    noise_scale: f64,
    keep: usize,
) -> Result<(LatticeState, Coefficients, Coefficients)> {
    cfg.validate()?;
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(domain(
            "vacuum_state",
            "noise_scale must be finite and >= 0",
        ));
    }
    let nx = cfg.nx;
    let half = nx / 2;
    let length = cfg.length();
    let nodes = cfg.omega_grid.nodes();
    let weights = cfg.omega_grid.weights();
    let keff: Vec<f64> = (0..=half).map(|q| cfg.lattice_wavenumber(q)).collect();

    let mut state = LatticeState::zeros(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut y0 = vec![vec![Complex64::new(0.0, 0.0); nodes.len()]; keep];
    let mut v0 = y0.clone();
    let twiddle: Vec<Complex64> = (0..nx)
        .map(|x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x as f64 / nx as f64))
        .collect();
    let mut coeff_y = vec![Complex64::new(0.0, 0.0); half + 1];
    let mut coeff_v = coeff_y.clone();
    for (j, (&w, &wt)) in nodes.iter().zip(weights).enumerate() {
        for q in 1..=half {
            let wq = keff[q].hypot(w);
            let var_y = noise_scale / (2.0 * wq * wt * length);
            let var_v = noise_scale * wq / (2.0 * wt * length);
            let (cy, cv) = if q < half {
                let (sy, sv) = ((0.5 * var_y).sqrt(), (0.5 * var_v).sqrt());
                (
                    Complex64::new(normal(), normal()) * sy,
                    Complex64::new(normal(), normal()) * sv,
                )
            } else {
                (
                    Complex64::new(normal() * var_y.sqrt(), 0.0),
                    Complex64::new(normal() * var_v.sqrt(), 0.0),
                )
            };
            coeff_y[q] = cy;
            coeff_v[q] = cv;
            if q <= keep {
                y0[q - 1][j] = cy;
                v0[q - 1][j] = cv;
            }
        }
        let row = j * nx..(j + 1) * nx;
        for (x, (y, v)) in state.y[row.clone()]
            .iter_mut()
            .zip(&mut state.y_dot[row])
            .enumerate()
        {
            let mut sy = 0.0;
            let mut sv = 0.0;
            for q in 1..=half {
                let e = twiddle[(q * x) & (nx - 1)];
                let scale = if q < half { 2.0 } else { 1.0 };
                sy += scale * (coeff_y[q] * e).re;
                sv += scale * (coeff_v[q] * e).re;
            }
            *y = sy;
            *v = sv;
        }
    }
    Ok((state, y0, v0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CouplingFunction;

    fn config(lambda: f64) -> LatticeConfig {
        let base = LatticeConfig::new(CouplingFunction::exp_cutoff(lambda, 1.0).unwrap()).unwrap();
        LatticeConfig {
            nx: 64,
            t_max: 6.0,
            ..base.with_reservoir(80, 20.0).unwrap()
        }
    }

    #[test]
    fn decoupled_mode_follows_the_free_response() {
        let c = run_quiescent_comparison(&config(0.0)).unwrap();
        assert!(c.max_rel_err < 1e-4, "{:e}", c.max_rel_err);
    }

    #[test]
    fn quiescent_run_matches_the_response_and_keeps_energy_out() {
        let c = run_quiescent_comparison(&config(1.0)).unwrap();
        assert!(c.max_rel_err < 1e-3, "{:e}", c.max_rel_err);
        assert!(c.field_energy_gap.unwrap() < 1e-3);
        // the field really is damped
        let last = c.trajectory.energy.last().unwrap();
        assert!(last.field < 0.9 * c.trajectory.energy[0].field);
    }

    #[test]
    fn quiet_reservoir_reduces_to_the_deterministic_problem() {
        let setup = LangevinSetup {
            noise_scale: 0.0,
            modes: 3,
            excite: Some((2, Complex64::new(0.5, 0.1), Complex64::new(0.0, -0.2))),
        };
        let c = run_langevin_comparison_with(&config(1.0), 3, &setup).unwrap();
        assert!(c.max_rel_err < 1e-3, "{:e}", c.max_rel_err);
        let silent = run_langevin_comparison_with(
            &config(1.0),
            3,
            &LangevinSetup {
                excite: None,
                ..setup
            },
        )
        .unwrap();
        assert_eq!(silent.max_rel_err, 0.0);
    }

    #[test]
    fn noise_driven_run_matches_the_langevin_route_at_second_order() {
        let cfg = config(1.0);
        let coarse = run_langevin_comparison(&cfg, 11).unwrap();
        let fine = run_langevin_comparison(
            &LatticeConfig {
                dt: 0.5 * cfg.dt,
                output_stride: 2 * cfg.output_stride,
                ..cfg.clone()
            },
            11,
        )
        .unwrap();
        assert!(coarse.max_rel_err < 2e-2);
        let order = (coarse.max_rel_err / fine.max_rel_err).log2();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn seeded_runs_repeat_exactly_for_any_thread_count() {
        let cfg = config(0.7);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_langevin_comparison(&cfg, 5).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.max_rel_err.to_bits(), b.max_rel_err.to_bits());
        let c = run_langevin_comparison(&cfg, 6).unwrap();
        assert_ne!(a.trajectory, c.trajectory);
    }

    #[test]
    fn rejects_bad_setups() {
        let cfg = config(1.0);
        for setup in [
            LangevinSetup {
                modes: 0,
                ..Default::default()
            },
            LangevinSetup {
                modes: 32,
                ..Default::default()
            },
            LangevinSetup {
                noise_scale: -1.0,
                ..Default::default()
            },
            LangevinSetup {
                excite: Some((40, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))),
                ..Default::default()
            },
        ] {
            assert!(run_langevin_comparison_with(&cfg, 1, &setup).is_err());
        }
    }
}
