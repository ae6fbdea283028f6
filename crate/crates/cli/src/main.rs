use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use covfield_cli::{configure_workers, execute, parse_config_with, CliError, Command, RunConfig};

/// Dissipative scalar field toolkit. Set COVFIELD_WORKERS to fix the number
/// of worker threads.
#[derive(Debug, Parser)]
#[command(name = "covfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// configuration file (INI-like; see the README)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// output directory, overriding `out` in the configuration
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// random seed, overriding `seed` in the configuration
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// progress and summary on stderr
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// tabulate the light-cone profile g(u) of the memory kernel
    Kernel,
    /// recover f^2(omega) from a tabulated kernel
    Invert,
    /// response functions alpha(k,t), beta(k,t)
    Response,
    /// noise spectrum against the absorptive susceptibility
    Fdt,
    /// noise commutator against the retarded kernel
    Commutator,
    /// late-time two-point function of the field
    Correlator,
    /// lattice co-simulation of field and reservoir
    Simulate,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Kernel => Command::Kernel,
            Sub::Invert => Command::Invert,
            Sub::Response => Command::Response,
            Sub::Fdt => Command::Fdt,
            Sub::Commutator => Command::Commutator,
            Sub::Correlator => Command::Correlator,
            Sub::Simulate => Command::Simulate,
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let command = cli.command.command();
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                msg: e.to_string(),
            })?;
            parse_config_with(&text, Some(command)).map_err(|e| match e {
                CliError::Config { line, msg } => CliError::Config {
                    line,
                    msg: format!("{msg} (in {})", path.display()),
                },
                other => other,
            })?
        }
        None => RunConfig::new(command),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|workers| {
        if let (Some(n), true) = (workers, cli.verbose) {
            eprintln!("using {n} worker threads");
        }
        let cfg = load(&cli)?;
        execute(&cfg, cli.verbose)
    });
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("covfield: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
