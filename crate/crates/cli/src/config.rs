//! Run configuration: a small INI-like text format.
//!
//! ```text
//! # full-line comments start with '#' or ';'
//! command = kernel
//! family = exp-cutoff
//! lambda = 1
//! cutoff = 1
//!
//! [kernel]
//! points = 401
//! ```
//!
//! Lines are `key = value` or `[section]`. Keys before the first section
//! are global: `command`, `seed`, `out`, `family`, `lambda`, `cutoff`,
//! `table`, `m`. Comments must stand on their own line. Each command has a section of its own parameters; see
//! [`RunConfig`] for keys and defaults. Lists are comma-separated. Unknown
//! sections and keys, repeated keys and out-of-range values are errors
//! carrying the line number.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use covfield_core::io::fmt_g17;
use covfield_core::CouplingFunction;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Kernel,
    Invert,
    Response,
    Fdt,
    Commutator,
    Correlator,
    Simulate,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Kernel,
        Command::Invert,
        Command::Response,
        Command::Fdt,
        Command::Commutator,
        Command::Correlator,
        Command::Simulate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Invert => "invert",
            Command::Response => "response",
            Command::Fdt => "fdt",
            Command::Commutator => "commutator",
            Command::Correlator => "correlator",
            Command::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown command `{s}` (expected one of {})",
                    names(Command::ALL.map(Command::name))
                )
            })
    }
}

fn names<const N: usize>(list: [&str; N]) -> String {
    list.join(", ")
}

/// Word-valued settings share parsing and printing.
macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
        #[serde(rename_all = "kebab-case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown value `{other}` (expected {})", names([$($text),+]))),
                }
            }
        }
    };
}

keyword_enum!(
    /// How `kernel` obtains `g(u)`.
    KernelMethod { ClosedForm => "closed-form", Quadrature => "quadrature" }
);
keyword_enum!(ResponseMethod { Volterra => "volterra", DeHoog => "de-hoog" });
keyword_enum!(
    /// Initial reservoir of `simulate`.
    Reservoir { Quiescent => "quiescent", Vacuum => "vacuum" }
);

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CouplingSpec {
    ExpCutoff {
        lambda: f64,
        cutoff: f64,
    },
    GaussianCutoff {
        lambda: f64,
        cutoff: f64,
    },
    /// two-column `omega,f2` CSV
    Tabulated {
        table: PathBuf,
    },
}

impl CouplingSpec {
    /// Builds the coupling, reading the table (relative to the working
    /// directory) when there is one.
    pub fn build(&self) -> Result<CouplingFunction> {
        let made = match self {
            CouplingSpec::ExpCutoff { lambda, cutoff } => {
                CouplingFunction::exp_cutoff(*lambda, *cutoff)
            }
            CouplingSpec::GaussianCutoff { lambda, cutoff } => {
                CouplingFunction::gaussian_cutoff(*lambda, *cutoff)
            }
            CouplingSpec::Tabulated { table } => {
                let text = std::fs::read_to_string(table).map_err(|e| CliError::io(table, e))?;
                CouplingFunction::from_csv(&text)
            }
        };
        made.map_err(|source| CliError::Core {
            context: "building the coupling".into(),
            source,
        })
    }
}

/// `[kernel]`: the profile `g(u)` on `points` evenly spaced `u` in `[0, u_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelParams {
    pub u_max: f64,
    pub points: usize,
    /// `closed-form` falls back to quadrature for tabulated couplings
    pub method: KernelMethod,
}

/// `[invert]`: `f^2` on `points` evenly spaced `omega` in `[0, omega_max]`
/// from a `u,gamma` table, or from the coupling's own kernel when no
/// `input` is given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvertParams {
    pub input: Option<PathBuf>,
    pub omega_max: f64,
    pub points: usize,
}

/// `[response]`: `alpha`, `beta` of mode `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseParams {
    pub k: f64,
    pub t_max: f64,
    /// spacing of the written rows
    pub output_dt: f64,
    pub method: ResponseMethod,
    /// de Hoog terms
    pub nodes: usize,
}

/// `[fdt]`: every pair of `k` and `omega`; each `omega` must exceed every `|k|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdtParams {
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
}

/// `[commutator]`: every pair of separations `x`, `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorParams {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub k_max: f64,
    pub regulator: f64,
}

/// `[correlator]`: every pair of separations `x`, `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorParams {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub k_max: f64,
    pub level: u32,
}

/// `[simulate]`: the lattice run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateParams {
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub n_omega: usize,
    pub omega_max: f64,
    pub t_max: f64,
    pub probe_mode: usize,
    pub output_stride: usize,
    pub reservoir: Reservoir,
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    pub coupling: CouplingSpec,
    pub m: f64,
    pub kernel: KernelParams,
    pub invert: InvertParams,
    pub response: ResponseParams,
    pub fdt: FdtParams,
    pub commutator: CommutatorParams,
    pub correlator: CorrelatorParams,
    pub simulate: SimulateParams,
}

impl RunConfig {
    /// Every parameter at its default; exp-cutoff coupling with `lambda = cutoff = 1`.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            out: PathBuf::from("out"),
            coupling: CouplingSpec::ExpCutoff {
                lambda: 1.0,
                cutoff: 1.0,
            },
            m: 1.0,
            kernel: KernelParams {
                u_max: 10.0,
                points: 201,
                method: KernelMethod::ClosedForm,
            },
            invert: InvertParams {
                input: None,
                omega_max: 10.0,
                points: 101,
            },
            response: ResponseParams {
                k: 1.0,
                t_max: 20.0,
                output_dt: 0.1,
                method: ResponseMethod::Volterra,
                nodes: 64,
            },
            fdt: FdtParams {
                k: vec![0.0, 0.5, 1.0, 1.5, 2.0],
                omega: vec![2.5, 4.0],
            },
            commutator: CommutatorParams {
                x: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
                t: vec![-1.75, -0.875, 0.0, 0.875, 1.75],
                k_max: 40.0,
                regulator: 1.0,
            },
            correlator: CorrelatorParams {
                x: vec![0.0, 0.5, 1.0],
                t: vec![0.0, 0.5],
                k_max: 40.0,
                level: 0,
            },
            simulate: SimulateParams {
                nx: 256,
                dx: 0.1,
                dt: 0.004,
                n_omega: 200,
                omega_max: 20.0,
                t_max: 10.0,
                probe_mode: 1,
                output_stride: 25,
                reservoir: Reservoir::Quiescent,
                noise_scale: 1.0,
            },
        }
    }

    /// Text that [`parse_config`] turns back into an equal configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let num = fmt_g17;
        let list = |v: &[f64]| v.iter().map(|x| fmt_g17(*x)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out.display());
        match &self.coupling {
            CouplingSpec::ExpCutoff { lambda, cutoff }
            | CouplingSpec::GaussianCutoff { lambda, cutoff } => {
                let family = if matches!(self.coupling, CouplingSpec::ExpCutoff { .. }) {
                    "exp-cutoff"
                } else {
                    "gaussian-cutoff"
                };
                let _ = writeln!(
                    s,
                    "family = {family}\nlambda = {}\ncutoff = {}",
                    num(*lambda),
                    num(*cutoff)
                );
            }
            CouplingSpec::Tabulated { table } => {
                let _ = writeln!(s, "family = tabulated\ntable = {}", table.display());
            }
        }
        let _ = writeln!(s, "m = {}", num(self.m));

        let k = &self.kernel;
        let _ = writeln!(
            s,
            "\n[kernel]\nu_max = {}\npoints = {}\nmethod = {}",
            num(k.u_max),
            k.points,
            k.method.name()
        );
        let i = &self.invert;
        let _ = writeln!(s, "\n[invert]");
        if let Some(p) = &i.input {
            let _ = writeln!(s, "input = {}", p.display());
        }
        let _ = writeln!(s, "omega_max = {}\npoints = {}", num(i.omega_max), i.points);
        let r = &self.response;
        let _ = writeln!(
            s,
            "\n[response]\nk = {}\nt_max = {}\noutput_dt = {}\nmethod = {}\nnodes = {}",
            num(r.k),
            num(r.t_max),
            num(r.output_dt),
            r.method.name(),
            r.nodes
        );
        let _ = writeln!(
            s,
            "\n[fdt]\nk = {}\nomega = {}",
            list(&self.fdt.k),
            list(&self.fdt.omega)
        );
        let c = &self.commutator;
        let _ = writeln!(
            s,
            "\n[commutator]\nx = {}\nt = {}\nk_max = {}\nregulator = {}",
            list(&c.x),
            list(&c.t),
            num(c.k_max),
            num(c.regulator)
        );
        let c = &self.correlator;
        let _ = writeln!(
            s,
            "\n[correlator]\nx = {}\nt = {}\nk_max = {}\nlevel = {}",
            list(&c.x),
            list(&c.t),
            num(c.k_max),
            c.level
        );
        let m = &self.simulate;
        let _ = writeln!(
            s,
            "\n[simulate]\nnx = {}\ndx = {}\ndt = {}\nn_omega = {}\nomega_max = {}\nt_max = {}\nprobe_mode = {}\noutput_stride = {}\nreservoir = {}\nnoise_scale = {}",
            m.nx,
            num(m.dx),
            num(m.dt),
            m.n_omega,
            num(m.omega_max),
            num(m.t_max),
            m.probe_mode,
            m.output_stride,
            m.reservoir.name(),
            num(m.noise_scale)
        );
        s
    }
}

const SECTIONS: [&str; 7] = [
    "kernel",
    "invert",
    "response",
    "fdt",
    "commutator",
    "correlator",
    "simulate",
];

struct Line<'a> {
    no: usize,
    value: &'a str,
}

impl Line<'_> {
    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        CliError::Config {
            line: self.no,
            msg: format!("`{key}`: {msg}"),
        }
    }

    fn real(&self, key: &str) -> Result<f64> {
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.err(key, format!("`{}` is not a number", self.value)))?;
        if !v.is_finite() {
            return Err(self.err(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.real(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be > 0, got {v}")))
        }
    }

    fn non_negative(&self, key: &str) -> Result<f64> {
        let v = self.real(key)?;
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be >= 0, got {v}")))
        }
    }

    fn integer<T>(&self, key: &str, lo: u64, hi: u64) -> Result<T>
    where
        T: FromStr + TryFrom<u64>,
    {
        let v: u64 = self.value.parse().map_err(|_| {
            self.err(
                key,
                format!("`{}` is not a non-negative integer", self.value),
            )
        })?;
        if v < lo || v > hi {
            return Err(self.err(key, format!("must lie in [{lo}, {hi}], got {v}")));
        }
        T::try_from(v).map_err(|_| self.err(key, "out of range"))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.value
            .split(',')
            .map(|item| {
                Line {
                    no: self.no,
                    value: item.trim(),
                }
                .real(key)
            })
            .collect()
    }

    fn word<T: FromStr<Err = String>>(&self, key: &str) -> Result<T> {
        self.value.parse().map_err(|e| self.err(key, e))
    }

    fn path(&self) -> PathBuf {
        PathBuf::from(self.value)
    }
}

/// Parses and validates a configuration; `command` must be present.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, None)
}

/// As [`parse_config`], with a command to use when the text names none.
/// When both are given they must agree.
pub fn parse_config_with(text: &str, command: Option<Command>) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(command.unwrap_or(Command::Kernel));
    let mut named: Option<(Command, usize)> = None;
    let mut seen: HashMap<(Option<&str>, &str), usize> = HashMap::new();
    let mut section: Option<&str> = None;
    let mut family: Option<(&str, usize)> = None;
    let mut lambda: Option<(f64, usize)> = None;
    let mut cutoff: Option<(f64, usize)> = None;
    let mut table: Option<(PathBuf, usize)> = None;
    let mut lines_of: HashMap<&str, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(CliError::Config {
                line: no,
                msg: format!("malformed section header `{line}`"),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(CliError::Config {
                    line: no,
                    msg: format!(
                        "unknown section `[{name}]` (expected one of {})",
                        names(SECTIONS)
                    ),
                });
            }
            section = Some(
                SECTIONS
                    .into_iter()
                    .find(|s| *s == name)
                    .expect("known section"),
            );
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(CliError::Config {
            line: no,
            msg: format!("expected `key = value` or `[section]`, found `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Config {
                line: no,
                msg: "missing key before `=`".into(),
            });
        }
        if value.is_empty() {
            return Err(CliError::Config {
                line: no,
                msg: format!("`{key}` has no value"),
            });
        }
        if let Some(first) = seen.insert((section, key), no) {
            return Err(CliError::Config {
                line: no,
                msg: format!("`{key}` repeats the setting on line {first}"),
            });
        }
        let l = Line { no, value };
        let unknown = || CliError::Config {
            line: no,
            msg: match section {
                None => format!("unknown global key `{key}`"),
                Some(s) => format!("unknown key `{key}` in [{s}]"),
            },
        };
        match section {
            None => match key {
                "command" => named = Some((l.word(key)?, no)),
                "seed" => cfg.seed = l.integer(key, 0, u64::MAX)?,
                "out" => cfg.out = l.path(),
                "family" => family = Some((value, no)),
                "lambda" => lambda = Some((l.non_negative(key)?, no)),
                "cutoff" => cutoff = Some((l.positive(key)?, no)),
                "table" => table = Some((l.path(), no)),
                "m" => cfg.m = l.positive(key)?,
                _ => return Err(unknown()),
            },
            Some("kernel") => match key {
                "u_max" => cfg.kernel.u_max = l.positive(key)?,
                "points" => cfg.kernel.points = l.integer(key, 2, 1_000_000)?,
                "method" => cfg.kernel.method = l.word(key)?,
                _ => return Err(unknown()),
            },
            Some("invert") => match key {
                "input" => cfg.invert.input = Some(l.path()),
                "omega_max" => cfg.invert.omega_max = l.positive(key)?,
                "points" => cfg.invert.points = l.integer(key, 2, 100_000)?,
                _ => return Err(unknown()),
            },
            Some("response") => match key {
                "k" => cfg.response.k = l.non_negative(key)?,
                "t_max" => cfg.response.t_max = l.positive(key)?,
                "output_dt" => {
                    cfg.response.output_dt = l.positive(key)?;
                    lines_of.insert("output_dt", no);
                }
                "method" => cfg.response.method = l.word(key)?,
                "nodes" => cfg.response.nodes = l.integer(key, 16, 512)?,
                _ => return Err(unknown()),
            },
            Some("fdt") => match key {
                "k" => {
                    cfg.fdt.k = l.list(key)?;
                    lines_of.insert("fdt.k", no);
                }
                "omega" => {
                    cfg.fdt.omega = l.list(key)?;
                    lines_of.insert("fdt.omega", no);
                }
                _ => return Err(unknown()),
            },
            Some("commutator") => match key {
                "x" => cfg.commutator.x = l.list(key)?,
                "t" => cfg.commutator.t = l.list(key)?,
                "k_max" => cfg.commutator.k_max = l.positive(key)?,
                "regulator" => cfg.commutator.regulator = l.positive(key)?,
                _ => return Err(unknown()),
            },
            Some("correlator") => match key {
                "x" => cfg.correlator.x = l.list(key)?,
                "t" => cfg.correlator.t = l.list(key)?,
                "k_max" => cfg.correlator.k_max = l.positive(key)?,
                "level" => cfg.correlator.level = l.integer(key, 0, 6)?,
                _ => return Err(unknown()),
            },
            Some("simulate") => {
                let s = &mut cfg.simulate;
                match key {
                    "nx" => {
                        s.nx = l.integer(key, 4, 1 << 20)?;
                        if !s.nx.is_power_of_two() {
                            return Err(l.err(key, format!("must be a power of two, got {}", s.nx)));
                        }
                    }
                    "dx" => s.dx = l.positive(key)?,
                    "dt" => s.dt = l.positive(key)?,
                    "n_omega" => s.n_omega = l.integer(key, 1, 4096)?,
                    "omega_max" => s.omega_max = l.positive(key)?,
                    "t_max" => s.t_max = l.positive(key)?,
                    "probe_mode" => s.probe_mode = l.integer(key, 1, 1 << 19)?,
                    "output_stride" => s.output_stride = l.integer(key, 1, 1 << 30)?,
                    "reservoir" => s.reservoir = l.word(key)?,
                    "noise_scale" => s.noise_scale = l.non_negative(key)?,
                    _ => return Err(unknown()),
                }
                lines_of.insert("simulate", no);
            }
            Some(_) => unreachable!("sections are checked above"),
        }
    }

    cfg.command = match (named, command) {
        (Some((c, no)), Some(want)) if c != want => {
            return Err(CliError::Config {
                line: no,
                msg: format!("`command`: the file is for `{c}` but `{want}` was requested"),
            })
        }
        (Some((c, _)), _) => c,
        (None, Some(c)) => c,
        (None, None) => return Err(CliError::Invalid("missing `command`".into())),
    };

    cfg.coupling = coupling_spec(family, lambda, cutoff, table)?;
    check_lists(&cfg, &lines_of)?;
    Ok(cfg)
}

fn coupling_spec(
    family: Option<(&str, usize)>,
    lambda: Option<(f64, usize)>,
    cutoff: Option<(f64, usize)>,
    table: Option<(PathBuf, usize)>,
) -> Result<CouplingSpec> {
    let (family, line) = family.unwrap_or(("exp-cutoff", 0));
    let stray = |what: &str, at: usize, why: &str| CliError::Config {
        line: at,
        msg: format!("`{what}` {why}"),
    };
    match family {
        "exp-cutoff" | "gaussian-cutoff" => {
            if let Some((_, at)) = table {
                return Err(stray("table", at, "is only used with `family = tabulated`"));
            }
            let lambda = lambda.map_or(1.0, |v| v.0);
            let cutoff = cutoff.map_or(1.0, |v| v.0);
            Ok(if family == "exp-cutoff" {
                CouplingSpec::ExpCutoff { lambda, cutoff }
            } else {
                CouplingSpec::GaussianCutoff { lambda, cutoff }
            })
        }
        "tabulated" => {
            if let Some((_, at)) = lambda {
                return Err(stray("lambda", at, "does not apply to a tabulated coupling"));
            }
            if let Some((_, at)) = cutoff {
                return Err(stray("cutoff", at, "does not apply to a tabulated coupling"));
            }
            let (table, _) = table.ok_or(CliError::Config {
                line,
                msg: "`family = tabulated` needs `table = <omega,f2 csv>`".into(),
            })?;
            Ok(CouplingSpec::Tabulated { table })
        }
        other => Err(CliError::Config {
            line,
            msg: format!("`family`: unknown value `{other}` (expected exp-cutoff, gaussian-cutoff, tabulated)"),
        }),
    }
}

fn check_lists(cfg: &RunConfig, lines: &HashMap<&str, usize>) -> Result<()> {
    let at = |key: &str| lines.get(key).copied();
    let fail = |line: Option<usize>, msg: String| match line {
        Some(line) => CliError::Config { line, msg },
        None => CliError::Invalid(msg),
    };
    let kmax = cfg.fdt.k.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    if let Some(w) = cfg.fdt.omega.iter().find(|w| !(**w > kmax + 1e-6)) {
        return Err(fail(
            at("fdt.omega").or(at("fdt.k")),
            format!("`omega`: every value must exceed max |k| = {kmax} (got {w})"),
        ));
    }
    let r = &cfg.response;
    if r.output_dt > r.t_max {
        return Err(fail(
            at("output_dt"),
            format!("`output_dt` = {} exceeds t_max = {}", r.output_dt, r.t_max),
        ));
    }
    let s = &cfg.simulate;
    if s.probe_mode >= s.nx / 2 {
        return Err(fail(
            at("simulate"),
            format!(
                "`probe_mode` = {} must be below nx/2 = {}",
                s.probe_mode,
                s.nx / 2
            ),
        ));
    }
    let limit = (s.dx / 2f64.sqrt()).min(0.1 / cfg.m.max(s.omega_max));
    if !(s.dt < limit) {
        return Err(fail(
            at("simulate"),
            format!(
                "`dt` = {} breaks dt < min(dx/sqrt 2, 0.1/max(m, omega_max)) = {limit}",
                s.dt
            ),
        ));
    }
    Ok(())
}
