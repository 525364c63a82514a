//! `qpoly`: run evaluation, Gram, Sobolev, factorization, identity and
//! operator checks from JSON job files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::{Outcome, Overrides};
use config::JobConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error {0}")]
    Config(String),
    #[error(transparent)]
    Math(#[from] qpoly::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(e) if e.is_config_error() => 2,
            CliError::Math(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qpoly", version, about = "Checks for classical q-orthogonal polynomial families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON result and any CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the job tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Quadrature nodes for the circle functional.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Seed for random sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Values through the recurrence and the series, with their discrepancy.
    Eval {
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
    },
    /// Gram matrix of the recurrence sequence under a functional.
    Gram {
        /// auto, canonical, circle, qracah, aw_degenerate, jackson, christoffel, root_of_unity
        #[arg(long)]
        functional: Option<String>,
    },
    /// Sobolev form: level plan, Gram check and characterization.
    Sobolev,
    /// Factorization at a vanishing recurrence coefficient.
    Factorize,
    /// Residuals of the family identities.
    Identities {
        /// all, family, or one identity name
        #[arg(long)]
        suite: Option<String>,
    },
    /// Eigenvalue checks of the tabulated operators.
    Eigencheck,
    /// Acceptance report over every job file of a directory.
    Report { config_dir: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Gram { .. } => "gram",
            Command::Sobolev => "sobolev",
            Command::Factorize => "factorize",
            Command::Identities { .. } => "identities",
            Command::Eigencheck => "eigencheck",
            Command::Report { .. } => "report",
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut o = Overrides { tol: cli.tol, nodes: cli.nodes, seed: cli.seed, ..Default::default() };
    if let Some(t) = o.tol {
        if !t.is_finite() || t <= 0.0 {
            return Err(CliError::Config("--tol must be a positive number".into()));
        }
    }
    if let Command::Report { config_dir } = &cli.command {
        return commands::report(config_dir, &o);
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = JobConfig::load(path)?;
    match &cli.command {
        Command::Eval { degrees } => {
            o.degrees = degrees.clone();
            commands::eval(&cfg, &o)
        }
        Command::Gram { functional } => {
            o.functional = functional.clone();
            commands::gram(&cfg, &o)
        }
        Command::Sobolev => commands::sobolev(&cfg, &o),
        Command::Factorize => commands::factorize(&cfg, &o),
        Command::Identities { suite } => {
            o.suite = suite.clone();
            commands::identities(&cfg, &o)
        }
        Command::Eigencheck => commands::eigencheck(&cfg, &o),
        Command::Report { .. } => unreachable!(),
    }
}

fn write_outputs(cli: &Cli, out: &Outcome, text: &str) -> Result<(), CliError> {
    let Some(dir) = &cli.out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{}.json", cli.command.name())), text)?;
    for (name, body) in &out.files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        let text = output::render(&out.json);
        write_outputs(&cli, &out, &text)?;
        print!("{text}");
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tolerance check failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
