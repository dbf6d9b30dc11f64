use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use itvolt_cli::commands::{self, TWO_LEVEL_CURVES};
use itvolt_cli::{write_rows, ConfigError, ModelKind, RowStatus, Settings};

const USAGE_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "itvolt", version, about = "Iterative Volterra propagator benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and print its result row.
    Run(Flags),
    /// Run every row of a sweep (comma-separated `solver`, `dt`, `points`
    /// or `cells = dt:n, ...`).
    Table(Flags),
    /// Sample the model's driving field.
    PulseData(Flags),
    /// Sample the model's analytic solution.
    OracleData(Flags),
}

#[derive(Args)]
struct Flags {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    /// analytic, diag, lanczos or chebyshev.
    #[arg(long)]
    expm: Option<String>,
    #[arg(long)]
    e0: Option<String>,
    #[arg(long)]
    t_final: Option<String>,
    #[arg(long)]
    omega0: Option<String>,
    #[arg(long)]
    states: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    /// Report the largest iteration-matrix spectral radius.
    #[arg(long)]
    diagnostics: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-checkpoint errors to this file.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

impl Flags {
    fn settings(&self) -> Result<Settings, ConfigError> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let text = [
            ("model", &self.model),
            ("solver", &self.solver),
            ("dt", &self.dt),
            ("points", &self.points),
            ("tol", &self.tol),
            ("max_iters", &self.max_iters),
            ("expm", &self.expm),
            ("e0", &self.e0),
            ("t_final", &self.t_final),
            ("omega0", &self.omega0),
            ("states", &self.states),
            ("repeats", &self.repeats),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                settings.set(key, v)?;
            }
        }
        if self.diagnostics {
            settings.set("diagnostics", "true")?;
        }
        for (key, value) in [("out", &self.out), ("trajectory", &self.trajectory)] {
            if let Some(path) = value {
                settings.set(key, &path.to_string_lossy())?;
            }
        }
        Ok(settings)
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(format!("{e:#}"))
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(flags) => {
            let config = flags.settings()?.to_config()?;
            let (row, run) = commands::run(&config)?;
            if let Some(path) = &config.trajectory {
                commands::write_trajectory(output(Some(path))?, &config, &run)?;
            }
            write_rows(output(config.out.as_deref())?, &[row]).map_err(anyhow::Error::from)?;
        }
        Command::Table(flags) => {
            let settings = flags.settings()?;
            let out = settings.get("out").map(PathBuf::from);
            let configs = settings
                .expand_sweep()?
                .iter()
                .map(Settings::to_config)
                .collect::<Result<Vec<_>, _>>()?;
            let results = commands::table(&configs);
            for (row, error) in &results {
                if let Some(e) = error {
                    eprintln!("{} dt={} n={:?}: {e:#}", row.solver, row.dt, row.points);
                }
            }
            let rows: Vec<_> = results.into_iter().map(|(row, _)| row).collect();
            write_rows(output(out.as_deref())?, &rows).map_err(anyhow::Error::from)?;
            if !rows.is_empty() && rows.iter().all(|r| r.status == RowStatus::Failed) {
                return Err(Failure::Runtime("every row failed".into()));
            }
        }
        Command::PulseData(flags) => {
            let settings = flags.settings()?;
            let params = settings.to_params()?;
            let out = output(settings.get("out").map(Path::new))?;
            commands::pulse_data(out, &params, settings.positive("dt")?)?;
        }
        Command::OracleData(flags) => {
            let settings = flags.settings()?;
            let params = settings.to_params()?;
            let amplitudes = match (params.model, settings.get("e0")) {
                (ModelKind::TwoLevel, None) => TWO_LEVEL_CURVES.to_vec(),
                _ => vec![params.e0],
            };
            let out = output(settings.get("out").map(Path::new))?;
            commands::oracle_data(out, &params, &amplitudes, settings.positive("dt")?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE_ERROR)
        }
        Err(Failure::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
