use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::io::Table;

use super::LatticeConfig;

/// Field, reservoir fields `Y_j` and their velocities at one instant.
/// Reservoir arrays are row-major, one row of `nx` sites per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub y: Vec<f64>,
    pub y_dot: Vec<f64>,
    pub t: f64,
}

impl LatticeState {
    pub fn zeros(cfg: &LatticeConfig) -> Self {
        let n = cfg.nx * cfg.omega_grid.len();
        Self {
            phi: vec![0.0; cfg.nx],
            pi: vec![0.0; cfg.nx],
            y: vec![0.0; n],
            y_dot: vec![0.0; n],
            t: 0.0,
        }
    }

    /// Adds a plane wave so that the field's Fourier coefficient
    /// `(1/nx) sum_x phi(x) e^{-ikx}` at index `q` grows by `phi_q` (and
    /// likewise for `pi`). For `phi_q = A/2` this is `A cos(kx)`.
    pub fn add_mode(&mut self, cfg: &LatticeConfig, q: usize, phi_q: Complex64, pi_q: Complex64) {
        let k = cfg.wavenumber(q);
        let nyquist = 2 * q == cfg.nx || q == 0;
        let scale = if nyquist { 1.0 } else { 2.0 };
        for (x, (p, v)) in self.phi.iter_mut().zip(self.pi.iter_mut()).enumerate() {
            let e = Complex64::from_polar(1.0, k * x as f64 * cfg.dx);
            *p += scale * (phi_q * e).re;
            *v += scale * (pi_q * e).re;
        }
    }

    fn check(&self, cfg: &LatticeConfig) -> Result<()> {
        let rows = cfg.omega_grid.len();
        if self.phi.len() != cfg.nx
            || self.pi.len() != cfg.nx
            || self.y.len() != rows * cfg.nx
            || self.y_dot.len() != rows * cfg.nx
        {
            return Err(domain(
                "LatticeState",
                format!(
                    "array sizes do not match nx = {} and {rows} reservoir frequencies",
                    cfg.nx
                ),
            ));
        }
        Ok(())
    }
}

/// Energy split; `total` is the sum of the other three.
///
/// Kinetic terms use the product of the velocities half a step before and
/// after, `v_{n-1/2} v_{n+1/2} = v_n^2 - (dt/2)^2 a_n^2`, which the leapfrog
/// conserves to rounding for any linear system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub field: f64,
    pub reservoir: f64,
    pub interaction: f64,
    pub total: f64,
}

/// Samples of a run: the chosen Fourier coefficients of `phi` and the
/// energies every `output_stride` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub modes: Vec<usize>,
    /// `amplitudes[i][n]`: coefficient of `modes[i]` at `times[n]`
    pub amplitudes: Vec<Vec<Complex64>>,
    pub energy: Vec<EnergyReport>,
}

impl Trajectory {
    pub const COLUMNS: [&'static str; 7] = [
        "t",
        "phi_k_re",
        "phi_k_im",
        "energy_total",
        "energy_field",
        "energy_res",
        "energy_int",
    ];

    /// Largest `|E(t) - E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0].total;
        self.energy
            .iter()
            .map(|e| (e.total - e0).abs())
            .fold(0.0, f64::max)
            / e0.abs()
    }

    /// CSV of the first recorded mode and the energies.
    pub fn to_csv(&self) -> String {
        self.table(0).to_csv()
    }

    /// CSV of recorded mode `q`, if it was recorded.
    pub fn to_csv_for(&self, q: usize) -> Option<String> {
        self.modes
            .iter()
            .position(|m| *m == q)
            .map(|i| self.table(i).to_csv())
    }

    fn table(&self, i: usize) -> Table {
        let mut t = Table::new(&Self::COLUMNS);
        for (n, time) in self.times.iter().enumerate() {
            let a = self.amplitudes[i][n];
            let e = self.energy[n];
            t.push(vec![
                *time,
                a.re,
                a.im,
                e.total,
                e.field,
                e.reservoir,
                e.interaction,
            ]);
        }
        t
    }
}

/// Leapfrog integrator holding the state and the accelerations at the
/// current positions.
#[derive(Debug, Clone)]
pub struct Lattice {
    cfg: LatticeConfig,
    omega2: Vec<f64>,
    weight: Vec<f64>,
    f: Vec<f64>,
    state: LatticeState,
    acc_phi: Vec<f64>,
    acc_y: Vec<f64>,
    steps: u64,
    t0: f64,
    twiddle: Vec<Complex64>,
}

impl Lattice {
    pub fn new(cfg: &LatticeConfig, state: LatticeState) -> Result<Self> {
        cfg.validate()?;
        state.check(cfg)?;
        let mut omega2 = Vec::with_capacity(cfg.omega_grid.len());
        let mut weight = Vec::with_capacity(cfg.omega_grid.len());
        let mut f = Vec::with_capacity(cfg.omega_grid.len());
        for (w, wt) in cfg.omega_grid.iter() {
            let c = cfg.coupling.f(w);
            omega2.push(w * w);
            weight.push(wt);
            f.push(c);
        }
        let n = cfg.nx;
        let twiddle = (0..n)
            .map(|x| Complex64::from_polar(1.0, -2.0 * PI * x as f64 / n as f64))
            .collect();
        let t0 = state.t;
        let mut lat = Self {
            cfg: cfg.clone(),
            omega2,
            weight,
            f,
            acc_phi: vec![0.0; n],
            acc_y: vec![0.0; state.y.len()],
            state,
            steps: 0,
            t0,
            twiddle,
        };
        lat.reservoir_acceleration();
        lat.field_acceleration();
        Ok(lat)
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.cfg
    }

    pub fn state(&self) -> &LatticeState {
        &self.state
    }

    pub fn into_state(self) -> LatticeState {
        self.state
    }

    fn laplacian(v: &[f64], i: usize, inv_dx2: f64) -> f64 {
        let n = v.len();
        let left = v[(i + n - 1) & (n - 1)];
        let right = v[(i + 1) & (n - 1)];
        (left + right - 2.0 * v[i]) * inv_dx2
    }

    fn field_acceleration(&mut self) {
        let inv_dx2 = 1.0 / (self.cfg.dx * self.cfg.dx);
        let m2 = self.cfg.m * self.cfg.m;
        let phi = &self.state.phi;
        for (i, a) in self.acc_phi.iter_mut().enumerate() {
            *a = Self::laplacian(phi, i, inv_dx2) - m2 * phi[i];
        }
        // fixed ascending order in j
        let nx = self.cfg.nx;
        for (j, row) in self.state.y.chunks_exact(nx).enumerate() {
            let c = self.weight[j] * self.f[j];
            for (a, y) in self.acc_phi.iter_mut().zip(row) {
                *a += c * y;
            }
        }
    }

    fn reservoir_acceleration(&mut self) {
        let inv_dx2 = 1.0 / (self.cfg.dx * self.cfg.dx);
        let nx = self.cfg.nx;
        let phi = &self.state.phi;
        let (omega2, f) = (&self.omega2, &self.f);
        self.acc_y
            .par_chunks_exact_mut(nx)
            .zip(self.state.y.par_chunks_exact(nx))
            .enumerate()
            .for_each(|(j, (acc, row))| {
                for i in 0..nx {
                    acc[i] = Self::laplacian(row, i, inv_dx2) - omega2[j] * row[i] + f[j] * phi[i];
                }
            });
    }

    /// One kick-drift-kick step.
    pub fn step(&mut self) -> Result<()> {
        let h = self.cfg.dt;
        let half = 0.5 * h;
        let nx = self.cfg.nx;
        let s = &mut self.state;
        for ((p, v), a) in s.phi.iter_mut().zip(s.pi.iter_mut()).zip(&self.acc_phi) {
            *v += half * a;
            *p += h * *v;
        }
        s.y.par_chunks_exact_mut(nx)
            .zip(s.y_dot.par_chunks_exact_mut(nx))
            .zip(self.acc_y.par_chunks_exact(nx))
            .for_each(|((y, v), a)| {
                for i in 0..nx {
                    v[i] += half * a[i];
                    y[i] += h * v[i];
                }
            });
        self.reservoir_acceleration();
        self.field_acceleration();
        let s = &mut self.state;
        for (v, a) in s.pi.iter_mut().zip(&self.acc_phi) {
            *v += half * a;
        }
        s.y_dot
            .par_chunks_exact_mut(nx)
            .zip(self.acc_y.par_chunks_exact(nx))
            .for_each(|(v, a)| {
                for i in 0..nx {
                    v[i] += half * a[i];
                }
            });
        self.steps += 1;
        s.t = self.t0 + self.steps as f64 * h;
        if let Some(site) = s
            .phi
            .iter()
            .zip(&s.pi)
            .position(|(p, v)| !(p.is_finite() && v.is_finite()))
        {
            return Err(Error::BlowUp {
                field: "phi",
                site,
                t: s.t,
            });
        }
        Ok(())
    }

    fn check_reservoir(&self) -> Result<()> {
        let s = &self.state;
        if let Some(i) =
            s.y.iter()
                .zip(&s.y_dot)
                .position(|(y, v)| !(y.is_finite() && v.is_finite()))
        {
            return Err(Error::BlowUp {
                field: "reservoir",
                site: i % self.cfg.nx,
                t: s.t,
            });
        }
        Ok(())
    }

    pub fn energy(&self) -> EnergyReport {
        let dx = self.cfg.dx;
        let m2 = self.cfg.m * self.cfg.m;
        let q = 0.25 * self.cfg.dt * self.cfg.dt;
        let n = self.cfg.nx;
        let s = &self.state;
        let mut field = 0.0;
        for i in 0..n {
            let grad = (s.phi[(i + 1) & (n - 1)] - s.phi[i]) / dx;
            field += s.pi[i] * s.pi[i] - q * self.acc_phi[i] * self.acc_phi[i]
                + grad * grad
                + m2 * s.phi[i] * s.phi[i];
        }
        let rows: Vec<(f64, f64)> = s
            .y
            .par_chunks_exact(n)
            .zip(s.y_dot.par_chunks_exact(n))
            .zip(self.acc_y.par_chunks_exact(n))
            .enumerate()
            .map(|(j, ((y, v), a))| {
                let mut e = 0.0;
                let mut cross = 0.0;
                for i in 0..n {
                    let grad = (y[(i + 1) & (n - 1)] - y[i]) / dx;
                    e += v[i] * v[i] - q * a[i] * a[i] + grad * grad + self.omega2[j] * y[i] * y[i];
                    cross += s.phi[i] * y[i];
                }
                (0.5 * self.weight[j] * e, self.weight[j] * self.f[j] * cross)
            })
            .collect();
        let reservoir: f64 = rows.iter().map(|r| r.0).sum();
        let interaction: f64 = -rows.iter().map(|r| r.1).sum::<f64>();
        let field = 0.5 * field * dx;
        let reservoir = reservoir * dx;
        let interaction = interaction * dx;
        EnergyReport {
            field,
            reservoir,
            interaction,
            total: field + reservoir + interaction,
        }
    }

    /// `(1/nx) sum_x phi(x) e^{-2 pi i q x / nx}`
    pub fn mode(&self, q: usize) -> Complex64 {
        let n = self.cfg.nx;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, p) in self.state.phi.iter().enumerate() {
            acc += self.twiddle[(q * x) & (n - 1)] * p;
        }
        acc / n as f64
    }

    /// Runs to `t_max`, recording the probe mode.
    pub fn run(&mut self) -> Result<Trajectory> {
        let modes = [self.cfg.probe_mode];
        self.run_recording(&modes)
    }

    /// Runs to `t_max`, recording the given Fourier indices every
    /// `output_stride` steps and at the final step.
    pub fn run_recording(&mut self, modes: &[usize]) -> Result<Trajectory> {
        let steps = self.cfg.n_steps();
        let stride = self.cfg.output_stride;
        let mut traj = Trajectory {
            times: Vec::new(),
            modes: modes.to_vec(),
            amplitudes: vec![Vec::new(); modes.len()],
            energy: Vec::new(),
        };
        let record = |lat: &Self, traj: &mut Trajectory| -> Result<()> {
            lat.check_reservoir()?;
            traj.times.push(lat.state.t);
            for (a, q) in traj.amplitudes.iter_mut().zip(modes) {
                a.push(lat.mode(*q));
            }
            traj.energy.push(lat.energy());
            Ok(())
        };
        record(self, &mut traj)?;
        for n in 1..=steps {
            self.step()?;
            if n % stride == 0 || n == steps {
                record(self, &mut traj)?;
            }
        }
        Ok(traj)
    }
}

/// Advances `state` by one leapfrog step.
pub fn step(state: &LatticeState, cfg: &LatticeConfig) -> Result<LatticeState> {
    let mut lat = Lattice::new(cfg, state.clone())?;
    lat.step()?;
    Ok(lat.into_state())
}

pub fn total_energy(state: &LatticeState, cfg: &LatticeConfig) -> Result<EnergyReport> {
    Ok(Lattice::new(cfg, state.clone())?.energy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CouplingFunction;

    fn config(lambda: f64) -> LatticeConfig {
        LatticeConfig::new(CouplingFunction::exp_cutoff(lambda, 1.0).unwrap()).unwrap()
    }

    fn small(lambda: f64) -> LatticeConfig {
        LatticeConfig {
            nx: 64,
            ..config(lambda).with_reservoir(40, 20.0).unwrap()
        }
    }

    #[test]
    fn free_mode_energy_matches_closed_form() {
        let cfg = config(0.0);
        let a = 0.01;
        let k = cfg.lattice_wavenumber(1);
        let omega = (k * k + cfg.m * cfg.m).sqrt();
        let mut s = LatticeState::zeros(&cfg);
        // travelling wave A cos(kx - Omega t) at t = 0
        s.add_mode(
            &cfg,
            1,
            Complex64::new(0.5 * a, 0.0),
            Complex64::new(0.0, -0.5 * a * omega),
        );
        let e = total_energy(&s, &cfg).unwrap();
        let exact = 0.25 * cfg.length() * a * a * (omega * omega + k * k + cfg.m * cfg.m);
        assert!((e.total - exact).abs() < 1e-6, "{} vs {exact}", e.total);
        assert_eq!(e.reservoir, 0.0);
        assert_eq!(e.total, e.field + e.reservoir + e.interaction);
    }

    #[test]
    fn add_mode_sets_the_fourier_coefficient() {
        let cfg = small(0.3);
        let mut s = LatticeState::zeros(&cfg);
        let c = Complex64::new(0.3, -0.7);
        s.add_mode(&cfg, 3, c, Complex64::new(0.0, 0.0));
        let lat = Lattice::new(&cfg, s).unwrap();
        assert!((lat.mode(3) - c).norm() < 1e-15);
        assert!(lat.mode(2).norm() < 1e-15);
    }

    #[test]
    fn free_mode_period_from_zero_crossings() {
        let cfg = LatticeConfig {
            t_max: 20.0,
            ..small(0.0)
        };
        let mut s = LatticeState::zeros(&cfg);
        s.add_mode(&cfg, 1, Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0));
        let mut lat = Lattice::new(&cfg, s).unwrap();
        let mut crossings = Vec::new();
        let mut prev = (0.0, lat.state().phi[0]);
        for _ in 0..cfg.n_steps() {
            lat.step().unwrap();
            let cur = (lat.state().t, lat.state().phi[0]);
            if prev.1.signum() != cur.1.signum() {
                crossings.push(prev.0 + (cur.0 - prev.0) * prev.1 / (prev.1 - cur.1));
            }
            prev = cur;
        }
        let k = cfg.wavenumber(1);
        let expected = 2.0 * PI / (k * k + 1.0).sqrt();
        let measured =
            2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        assert!(
            (measured / expected - 1.0).abs() < 5e-3,
            "{measured} vs {expected}"
        );
    }

    #[test]
    fn energy_is_conserved_with_and_without_coupling() {
        for (lambda, tol) in [(0.0, 1e-10), (1.0, 1e-10)] {
            let cfg = LatticeConfig {
                t_max: 10.0,
                ..small(lambda)
            };
            let mut s = LatticeState::zeros(&cfg);
            s.add_mode(&cfg, 4, Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.2));
            let traj = Lattice::new(&cfg, s).unwrap().run().unwrap();
            assert!(
                traj.energy_drift() < tol,
                "lambda={lambda}: {:e}",
                traj.energy_drift()
            );
        }
    }

    #[test]
    fn coupling_moves_energy_into_the_reservoir() {
        let cfg = small(1.0);
        let mut s = LatticeState::zeros(&cfg);
        s.add_mode(&cfg, 4, Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0));
        let traj = Lattice::new(&cfg, s).unwrap().run().unwrap();
        let last = traj.energy.last().unwrap();
        // only the half-step kinetic correction at t = 0
        assert!(traj.energy[0].reservoir.abs() < 1e-6 * traj.energy[0].total);
        assert!(last.reservoir > 1e-3 * traj.energy[0].total, "{last:?}");
    }

    #[test]
    fn even_data_stays_even() {
        let cfg = LatticeConfig {
            t_max: 5.0,
            ..small(1.0)
        };
        let mut s = LatticeState::zeros(&cfg);
        let n = cfg.nx;
        for x in 0..n {
            let d = x.min(n - x) as f64 * cfg.dx;
            s.phi[x] = (-d * d).exp();
        }
        let mut lat = Lattice::new(&cfg, s).unwrap();
        for _ in 0..cfg.n_steps() {
            lat.step().unwrap();
        }
        let phi = &lat.state().phi;
        let scale = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for x in 1..n {
            assert!((phi[x] - phi[n - x]).abs() <= 1e-12 * scale, "site {x}");
        }
    }

    #[test]
    fn step_matches_the_integrator() {
        let cfg = small(0.5);
        let mut s = LatticeState::zeros(&cfg);
        s.add_mode(&cfg, 2, Complex64::new(0.1, 0.2), Complex64::new(0.0, 0.3));
        let once = step(&s, &cfg).unwrap();
        let mut lat = Lattice::new(&cfg, s).unwrap();
        lat.step().unwrap();
        assert_eq!(&once, lat.state());
        assert_eq!(once.t, cfg.dt);
    }

    #[test]
    fn blow_up_is_reported() {
        let cfg = small(0.5);
        let mut s = LatticeState::zeros(&cfg);
        s.phi[5] = f64::INFINITY;
        let mut lat = Lattice::new(&cfg, s).unwrap();
        assert!(matches!(
            lat.step(),
            Err(Error::BlowUp { field: "phi", .. })
        ));
    }

    #[test]
    fn zero_state_stays_zero() {
        let cfg = small(1.0);
        let mut lat = Lattice::new(&cfg, LatticeState::zeros(&cfg)).unwrap();
        for _ in 0..50 {
            lat.step().unwrap();
        }
        let s = lat.state();
        assert!(s
            .phi
            .iter()
            .chain(&s.pi)
            .chain(&s.y)
            .chain(&s.y_dot)
            .all(|v| *v == 0.0));
        let e = lat.energy();
        assert_eq!(
            (e.field, e.reservoir, e.interaction, e.total),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn interaction_energy_is_odd_in_the_field() {
        let cfg = small(1.0);
        let mut s = LatticeState::zeros(&cfg);
        s.add_mode(&cfg, 2, Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0));
        let mut lat = Lattice::new(&cfg, s).unwrap();
        for _ in 0..100 {
            lat.step().unwrap();
        }
        let mut flipped = lat.state().clone();
        flipped
            .phi
            .iter_mut()
            .chain(flipped.pi.iter_mut())
            .for_each(|v| *v = -*v);
        let a = lat.energy();
        let b = total_energy(&flipped, &cfg).unwrap();
        assert!(a.interaction.abs() > 0.0);
        assert_eq!(a.interaction, -b.interaction);
    }

    #[test]
    fn rejects_mismatched_state() {
        let cfg = small(0.5);
        let s = LatticeState::zeros(&config(0.5));
        assert!(Lattice::new(&cfg, s).is_err());
    }
}
