//! `qpir`: runs retrievals, trial batches, privacy audits and rate tables.
//!
//! Exit codes: 0 success or PASS, 1 validation error, 2 audit FAIL,
//! 3 internal assertion.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{BackendChoice, Experiment, ExperimentConfig};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

const CONFIG_HELP: &str = "\
Config keys (flat TOML, all optional):
  preset       example-3-2 | example-4-2 | lrc-8-4-2-3
  scheme       mds (default) | lrc
  code         grs (default) | parity-3-2 | rs-4-2   (mds only)
  n, k, t      code length, dimension, collusion (t defaults to n - k, or rho - 1 for lrc)
  r, rho       locality (lrc only)
  L            extension degree of GF(4^L) (default: smallest that fits)
  m, beta      number of files (default 2), stripes per file (default 1)
  file_index   requested file, 1-based
  seed         master seed (--seed and QPIR_SEED take precedence)
  backend      exact | symbolic (default) | both
  odd_n_mode   quantum (default) | basis
  audits       list of user-privacy, collusion-control, server-privacy, lrc-collusion
  colluders    1-based server positions to audit instead of all small sets
  server_trials  trials of the server-privacy audit (default 1000)

Exit codes: 0 success or PASS, 1 validation error, 2 audit FAIL, 3 internal assertion.";

#[derive(Parser)]
#[command(
    name = "qpir",
    version,
    about = "Quantum PIR simulator for MDS and LRC coded storage",
    after_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Flat TOML experiment config (repeatable for `trials`).
    #[arg(long, value_name = "PATH")]
    config: Vec<PathBuf>,
    /// Bundled preset: example-3-2, example-4-2, lrc-8-4-2-3 (repeatable for `trials`).
    #[arg(long, value_name = "NAME")]
    preset: Vec<String>,
    /// Master seed; overrides the config file.
    #[arg(long, env = "QPIR_SEED", value_name = "U64")]
    seed: Option<u64>,
    /// Simulation backend; overrides the config file.
    #[arg(long, value_parser = ["exact", "symbolic", "both"])]
    backend: Option<String>,
}

impl Source {
    fn experiments(&self) -> Result<Vec<Experiment>, CliError> {
        let backend = self.backend.as_deref().map(BackendChoice::parse).transpose()?;
        let mut configs: Vec<ExperimentConfig> = Vec::new();
        for path in &self.config {
            configs.push(ExperimentConfig::load(path)?);
        }
        configs.extend(self.preset.iter().map(|p| ExperimentConfig::from_preset(p)));
        if configs.is_empty() {
            return Err(CliError::Validation("give --config PATH or --preset NAME".into()));
        }
        configs.iter().map(|c| Experiment::resolve(c, self.seed, backend)).collect()
    }

    fn single(&self) -> Result<Experiment, CliError> {
        let mut exps = self.experiments()?;
        if exps.len() != 1 {
            return Err(CliError::Validation("this command takes exactly one --config or --preset".into()));
        }
        Ok(exps.remove(0))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one retrieval; write transcripts and a summary.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory for transcript-<backend>.txt and summary.txt.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run N seeded retrievals (seeds seed, seed+1, ...) and report the success fraction.
    Trials {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_name = "N", default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run the configured privacy audits.
    Audit {
        #[command(flatten)]
        source: Source,
        /// Trials of the server-privacy audit (at least 1000).
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Achieved rates against literature capacity constants.
    RateTable {
        /// Largest number of servers.
        #[arg(long, value_name = "N", default_value_t = 8)]
        max_n: usize,
        #[arg(long, env = "QPIR_SEED", value_name = "U64", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn save(out: Option<&PathBuf>, name: &str, text: &str) -> Result<(), CliError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("--out {}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Report text and whether the verdict is PASS.
fn execute(cli: Cli) -> Result<(String, bool), CliError> {
    match cli.command {
        Command::Run { source, out } => Ok((commands::cmd_run(&source.single()?, out.as_deref())?, true)),
        Command::Trials { source, trials, out } => {
            if trials == 0 {
                return Err(CliError::Validation("--trials must be positive".into()));
            }
            let (text, ok) = commands::cmd_trials(&source.experiments()?, trials)?;
            save(out.as_ref(), "trials.txt", &text)?;
            if !ok {
                print!("{text}");
                return Err(CliError::Internal("some retrievals failed".into()));
            }
            Ok((text, true))
        }
        Command::Audit { source, trials, out } => {
            let mut exp = source.single()?;
            if let Some(n) = trials {
                exp.server_trials = n;
            }
            let (text, pass) = commands::cmd_audit(&exp)?;
            save(out.as_ref(), "audit.txt", &text)?;
            Ok((text, pass))
        }
        Command::RateTable { max_n, seed, out } => {
            let text = commands::cmd_rate_table(max_n, seed)?;
            save(out.as_ref(), "rate-table.txt", &text)?;
            Ok((text, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok((text, pass)) => {
            print!("{text}");
            ExitCode::from(if pass { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 1,
                CliError::Internal(_) => 3,
            })
        }
    }
}
