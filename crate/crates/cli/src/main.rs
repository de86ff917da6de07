mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_override, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
struct Args {
    /// JSON configuration file; omitted sections take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Report energies in um^-1 and times in um.
    #[arg(long)]
    si: bool,
    /// `section.field=value` settings applied after the file.
    overrides: Vec<String>,
}

#[derive(Parser, Debug)]
#[command(name = "nhfp", version, about = "Floquet bands, gap scans and wave-packet dynamics of the driven lossy Rice-Mele lattice")]
struct Invocation {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Quasienergy bands, gap and winding numbers.
    Bands(Args),
    /// Gap over a grid of driving frequencies and loss amplitudes.
    Gapscan(Args),
    /// Real-space propagation of single-site inputs.
    Evolve(Args),
    /// Analytic and simulated spectral maps on a shared grid.
    Spectrum(Args),
    /// Numerical self-checks against the monodromy oracle.
    Check(Args),
}

fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let mut overrides = args.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    if args.si {
        overrides.push(("output.si".into(), serde_json::Value::Bool(true)));
    }
    let cfg = base.with_overrides(&overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NHFP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("NHFP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(inv: Invocation) -> Result<String, CliError> {
    configure_threads()?;
    let (name, args, f): (&str, &Args, fn(&RunConfig, &Path) -> Result<String, CliError>) = match &inv.command {
        Sub::Bands(a) => ("bands", a, commands::bands),
        Sub::Gapscan(a) => ("gapscan", a, commands::gapscan),
        Sub::Evolve(a) => ("evolve", a, commands::evolve),
        Sub::Spectrum(a) => ("spectrum", a, commands::spectrum),
        Sub::Check(a) => ("check", a, commands::check),
    };
    let cfg = resolve(args)?;
    let summary = f(&cfg, &args.out)?;
    Ok(format!("{name}: wrote {}\n{summary}", args.out.display()))
}

fn main() -> ExitCode {
    let inv = match Invocation::try_parse() {
        Ok(inv) => inv,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(inv) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nhfp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
