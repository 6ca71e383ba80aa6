use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tagsep_cli::config::{entries, from_entries, Experiment};
use tagsep_cli::run_experiment;

#[derive(Parser)]
#[command(name = "tagsep", version, about = "Tagged particle in exclusion processes on regular trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicas and write trajectories.
    Simulate(Common),
    /// Estimate the asymptotic speed.
    Speed(Common),
    /// Fluctuation diagnostics and variance growth.
    Clt(Common),
    /// Check the drift-compensated martingale.
    Martingale(Common),
    /// Check stationarity of the environment seen from the tagged particle.
    Stationarity(Common),
    /// Exact finite-ball checks.
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    strict_boundary: Option<Switch>,
    /// Override a configuration entry, e.g. `--set rho=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Simulate(c) => (Experiment::Simulate, c),
            Command::Speed(c) => (Experiment::Speed, c),
            Command::Clt(c) => (Experiment::Clt, c),
            Command::Martingale(c) => (Experiment::Martingale, c),
            Command::Stationarity(c) => (Experiment::Stationarity, c),
            Command::Oracle(c) => (Experiment::Oracle, c),
        }
    }
}

fn collect(common: &Common) -> Result<Vec<(String, String)>, String> {
    let mut list = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            entries(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => Vec::new(),
    };
    let mut overrides = Vec::new();
    for s in &common.set {
        overrides.extend(entries(s).map_err(|e| e.to_string())?);
    }
    let flags = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("replicas", common.replicas.map(|v| v.to_string())),
        ("out_dir", common.out_dir.as_ref().map(|p| p.display().to_string())),
        ("workers", common.workers.map(|v| v.to_string())),
        (
            "strict_boundary",
            common.strict_boundary.map(|s| matches!(s, Switch::On).to_string()),
        ),
    ];
    overrides.extend(flags.into_iter().filter_map(|(k, v)| Some((k.to_string(), v?))));
    for (k, v) in overrides {
        list.retain(|(key, _)| *key != k);
        list.push((k, v));
    }
    Ok(list)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, common) = cli.command.split();
    let cfg = match collect(&common).and_then(|l| from_entries(l, Some(experiment)).map_err(|e| e.to_string())) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
