use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use covfield_core::io::Table;
use covfield_core::kernel::{coupling_from_memory, memory_profile, MemoryKernel};
use covfield_core::micro_sim::{
    run_langevin_comparison_with, run_quiescent_comparison, Comparison, LangevinSetup,
    LatticeConfig,
};
use covfield_core::quantum::{
    commutator_check, fdt_check, CommutatorGrids, CorrelatorGrids, SteadyState, FDT_DENSITY_RATIO,
};
use covfield_core::response::{
    max_step, mode_response_laplace, mode_response_volterra, VolterraConfig,
};
use covfield_core::{CouplingFunction, LaplaceInversionConfig, QuadratureGrid};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Command, KernelMethod, Reservoir, ResponseMethod, RunConfig};
use crate::error::{CliError, Context, Result};
use crate::manifest::{sha256_hex, DirLock, Manifest, OutputEntry, MANIFEST};

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitReport {
    pub out_dir: PathBuf,
    /// written files, manifest last
    pub files: Vec<PathBuf>,
    pub summary: BTreeMap<String, Value>,
}

struct Output {
    files: Vec<(String, String)>,
    summary: BTreeMap<String, Value>,
}

impl Output {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    fn file(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text));
    }

    fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

/// Runs the configured command and writes its tables and `manifest.json`
/// into `cfg.out`, which is locked for the duration.
pub fn execute(cfg: &RunConfig, verbose: bool) -> Result<ExitReport> {
    let _lock = DirLock::acquire(&cfg.out)?;
    let coupling = cfg.coupling.build()?;
    if verbose {
        eprintln!(
            "covfield {}: coupling {}, output {}",
            cfg.command,
            coupling.family().name(),
            cfg.out.display()
        );
    }
    let out = match cfg.command {
        Command::Kernel => kernel(cfg, &coupling)?,
        Command::Invert => invert(cfg, &coupling)?,
        Command::Response => response(cfg, &coupling)?,
        Command::Fdt => fdt(cfg, &coupling)?,
        Command::Commutator => commutator(cfg, &coupling)?,
        Command::Correlator => correlator(cfg, &coupling)?,
        Command::Simulate => simulate(cfg, &coupling)?,
    };
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (name, text) in &out.files {
        let path = cfg.out.join(name);
        write(&path, text.as_bytes())?;
        entries.push(OutputEntry {
            file: name.clone(),
            bytes: text.len() as u64,
            sha256: sha256_hex(text.as_bytes()),
        });
        files.push(path);
    }
    let manifest = Manifest {
        tool: "covfield".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("configuration serialises"),
        outputs: entries,
        summary: out.summary.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    let path = cfg.out.join(MANIFEST);
    write(&path, text.as_bytes())?;
    files.push(path);
    if verbose {
        for (k, v) in &out.summary {
            eprintln!("  {k} = {v}");
        }
    }
    Ok(ExitReport {
        out_dir: cfg.out.clone(),
        files,
        summary: out.summary,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn even_grid(top: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| top * i as f64 / (points - 1) as f64)
        .collect()
}

fn kernel(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.kernel;
    let u = even_grid(p.u_max, p.points);
    let g: Vec<f64> = match p.method {
        KernelMethod::ClosedForm => {
            let k = MemoryKernel::from_coupling(f, &u)
                .context(|| "tabulating the memory kernel".into())?;
            u.iter().map(|&x| k.profile(x)).collect()
        }
        KernelMethod::Quadrature => u
            .par_iter()
            .map(|&x| memory_profile(f, x))
            .collect::<covfield_core::Result<_>>()
            .context(|| "memory kernel by quadrature".into())?,
    };
    let mut out = Output::new();
    out.note("g0", g[0]);
    out.file(
        "kernel.csv",
        covfield_core::io::write_two_column(["u", "gamma"], &u, &g),
    );
    Ok(out)
}

fn invert(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.invert;
    let kernel = match &p.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            MemoryKernel::from_csv(&text).context(|| format!("reading {}", path.display()))?
        }
        None => {
            let u = even_grid(cfg.kernel.u_max, cfg.kernel.points);
            MemoryKernel::from_coupling(f, &u).context(|| "tabulating the memory kernel".into())?
        }
    };
    let grid = kernel
        .inversion_grid(p.omega_max)
        .context(|| "building the inversion grid".into())?;
    let omega = even_grid(p.omega_max, p.points);
    let f2: Vec<f64> = omega
        .par_iter()
        .map(|&w| coupling_from_memory(&kernel, w, &grid))
        .collect::<covfield_core::Result<_>>()
        .context(|| "inverse transform".into())?;
    let mut out = Output::new();
    if p.input.is_none() {
        let dev = omega
            .iter()
            .zip(&f2)
            .map(|(w, v)| (v - f.f2(*w)).abs())
            .fold(0.0, f64::max);
        out.note("max_abs_deviation_from_coupling", dev);
    }
    out.file(
        "f2.csv",
        covfield_core::io::write_two_column(["omega", "f2"], &omega, &f2),
    );
    Ok(out)
}

fn response(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.response;
    let what = || format!("response of mode k = {}", p.k);
    let mut table = Table::new(&["t", "alpha", "beta"]);
    match p.method {
        ResponseMethod::Volterra => {
            let sub = (p.output_dt / max_step(f, p.k, cfg.m)).ceil().max(1.0) as usize;
            let vc = VolterraConfig {
                dt: p.output_dt / sub as f64,
                t_max: p.t_max,
                extrapolate: true,
            };
            let r = mode_response_volterra(f, p.k, cfg.m, &vc).context(what)?;
            for i in (0..r.len()).step_by(sub) {
                table.push(vec![i as f64 * vc.dt, r.alpha[i], r.beta[i]]);
            }
        }
        ResponseMethod::DeHoog => {
            let n = (p.t_max / p.output_dt + 1e-9).floor() as usize;
            let times: Vec<f64> = (1..=n).map(|i| i as f64 * p.output_dt).collect();
            let r = mode_response_laplace(
                f,
                p.k,
                cfg.m,
                &LaplaceInversionConfig::de_hoog(p.nodes),
                &times,
            )
            .context(what)?;
            table.push(vec![0.0, 0.0, 1.0]);
            for i in 0..r.len() {
                table.push(vec![r.times[i], r.alpha[i], r.beta[i]]);
            }
        }
    }
    let mut out = Output::new();
    out.note("rows", table.rows.len());
    out.file("response.csv", table.to_csv());
    Ok(out)
}

fn fdt(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.fdt;
    let pairs: Vec<(f64, f64)> =
        p.k.iter()
            .flat_map(|&k| p.omega.iter().map(move |&w| (k, w)))
            .collect();
    let samples = pairs
        .par_iter()
        .map(|&(k, w)| fdt_check(f, k, w))
        .collect::<covfield_core::Result<Vec<_>>>()
        .context(|| "noise spectrum and susceptibility".into())?;
    let mut table = Table::new(&["k", "omega", "lhs", "rhs", "ratio"]);
    for s in &samples {
        table.push(vec![s.k, s.omega, s.lhs, s.rhs, s.ratio]);
    }
    let mean = samples.iter().map(|s| s.ratio).sum::<f64>() / samples.len() as f64;
    let spread = samples
        .iter()
        .map(|s| (s.ratio / mean - 1.0).abs())
        .fold(0.0, f64::max);
    let mut out = Output::new();
    out.note("ratio_mean", mean);
    out.note("ratio_max_rel_spread", spread);
    out.note("ratio_expected", FDT_DENSITY_RATIO);
    out.note("four_pi_reference", 4.0 * PI);
    out.file("fdt.csv", table.to_csv());
    Ok(out)
}

fn commutator(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.commutator;
    let grids = CommutatorGrids {
        k_max: p.k_max,
        regulator: p.regulator,
        ..CommutatorGrids::for_coupling(f).context(|| "commutator grids".into())?
    };
    let mut table = Table::new(&["dx", "dt", "lhs", "rhs", "scaled_error"]);
    let mut worst = 0.0f64;
    for &t in &p.t {
        for &x in &p.x {
            let s = commutator_check(f, x, t, &grids)
                .context(|| format!("commutator at ({x}, {t})"))?;
            worst = worst.max(s.scaled_error());
            table.push(vec![x, t, s.lhs, s.rhs, s.scaled_error()]);
        }
    }
    let mut out = Output::new();
    out.note("worst_scaled_error", worst);
    out.file("commutator.csv", table.to_csv());
    Ok(out)
}

fn correlator(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.correlator;
    let grids = CorrelatorGrids::new(f, p.k_max, p.level).context(|| "correlator grids".into())?;
    let state = SteadyState::new(f, cfg.m, &grids).context(|| "steady-state spectrum".into())?;
    let mut table = Table::new(&["dx", "dt", "re", "im"]);
    for &t in &p.t {
        for &x in &p.x {
            let c = state
                .at(x, t)
                .context(|| format!("correlator at ({x}, {t})"))?;
            table.push(vec![x, t, c.value.re, c.value.im]);
        }
    }
    let mut out = Output::new();
    out.note("points", table.rows.len());
    out.file("correlator.csv", table.to_csv());
    Ok(out)
}

fn simulate(cfg: &RunConfig, f: &CouplingFunction) -> Result<Output> {
    let p = &cfg.simulate;
    let lattice = LatticeConfig {
        nx: p.nx,
        dx: p.dx,
        dt: p.dt,
        m: cfg.m,
        coupling: f.clone(),
        omega_grid: QuadratureGrid::gauss_legendre(p.n_omega, 0.0, p.omega_max)
            .context(|| "reservoir frequency grid".into())?,
        t_max: p.t_max,
        probe_mode: p.probe_mode,
        output_stride: p.output_stride,
    };
    let run: Comparison = match p.reservoir {
        Reservoir::Quiescent => {
            run_quiescent_comparison(&lattice).context(|| "quiescent lattice run".into())?
        }
        Reservoir::Vacuum => {
            let setup = LangevinSetup {
                noise_scale: p.noise_scale,
                modes: LangevinSetup::default().modes.min(p.nx / 2 - 1),
                excite: None,
            };
            run_langevin_comparison_with(&lattice, cfg.seed, &setup)
                .context(|| "noise-driven lattice run".into())?
        }
    };
    let traj = &run.trajectory;
    let mut cmp = Table::new(&["t", "sim_re", "sim_im", "pred_re", "pred_im"]);
    for ((t, s), q) in run.times.iter().zip(&run.simulated).zip(&run.predicted) {
        cmp.push(vec![*t, s.re, s.im, q.re, q.im]);
    }
    let mut out = Output::new();
    out.note("max_rel_err", run.max_rel_err);
    out.note("compared_mode", run.worst_mode);
    out.note("energy_drift", traj.energy_drift());
    if let Some(gap) = run.field_energy_gap {
        out.note("field_energy_gap", gap);
    }
    out.file(
        "simulate.csv",
        traj.to_csv_for(p.probe_mode)
            .expect("probe mode is always recorded"),
    );
    out.file("comparison.csv", cmp.to_csv());
    Ok(out)
}

/// Applies the `COVFIELD_WORKERS` override to the global thread pool.
pub fn configure_workers() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("COVFIELD_WORKERS") else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        CliError::Invalid(format!(
            "COVFIELD_WORKERS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("COVFIELD_WORKERS: {e}")))?;
    Ok(Some(n))
}
