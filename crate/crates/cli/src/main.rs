//! Command-line front end for the GUE expansion library.

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use gue_expand::Error;
use serde_json::json;

use commands::*;
use output::{merged, Format, Report};

#[derive(Debug, Parser)]
#[command(name = "gue-expand", version, about = "Asymptotic expansions for GUE linear statistics")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for internal parallelism.
    #[arg(long, global = true, env = "GUE_EXPAND_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate h_n and its derivatives.
    Density(DensityArgs),
    /// Expand E tr_n g(X_n) in powers of 1/n².
    Expand(ExpandArgs),
    /// Print the Stieltjes coefficient η_j.
    Eta(EtaArgs),
    /// Covariance of two linear statistics.
    Cov(CovArgs),
    /// Covariance of two resolvent traces and its expansion.
    G2(G2Args),
    /// Run the acceptance suite.
    Validate(ValidateArgs),
    /// Monte Carlo estimates from sampled GUE spectra.
    Mc(McArgs),
}

enum Failure {
    Usage(String),
    Numeric(String),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::Input(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn command() -> clap::Command {
    Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true))
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

// Inserts the config file's entries right after the subcommand name, so
// that later (explicit) flags override them.
fn with_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = read_config(&path)?;
    let cmd = command();
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s.clone())))
    else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Failure::Usage(format!("unknown config key {key:?} for {}", sub.get_name())))?;
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}={value}"));
        } else if matches!(value.as_str(), "true" | "1" | "yes") {
            injected.push(format!("--{key}"));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn run() -> Result<(), Failure> {
    let args = with_config(std::env::args().collect())?;
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            if e.use_stderr() {
                return Err(Failure::Usage(e.render().to_string()));
            }
            let _ = e.print();
            return Ok(());
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut passed = true;
    let report: Report = match &cli.command {
        Command::Density(a) => density(a)?,
        Command::Expand(a) => expand(a)?,
        Command::Eta(a) => eta_cmd(a)?,
        Command::Cov(a) => cov(a)?,
        Command::G2(a) => g2(a)?,
        Command::Validate(a) => {
            let (r, ok) = validate(a)?;
            passed = ok;
            r
        }
        Command::Mc(a) => mc(a)?,
    };
    let report = Report {
        config: merged(report.config, json!({"format": cli.format, "threads": cli.threads})),
        ..report
    };
    let text = report.render(cli.format);
    match &cli.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {}", m.trim_end());
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
