#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::experiments::{Table, Verdict};

#[derive(Parser)]
#[command(
    name = "idsim",
    version,
    about = "Simulate infinitely divisible processes and check their identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Report path; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registered experiments.
    List,
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'static str,
    experiment: &'a str,
    verdict: Verdict,
    config: &'a ExperimentConfig,
    result: Value,
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("IDSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| anyhow!("IDSIM_THREADS = {v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn run(path: &Path, seed: Option<u64>, reps: Option<usize>, out: Option<PathBuf>) -> Result<Verdict> {
    configure_threads()?;
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = reps {
        anyhow::ensure!(r > 0, "reps must be at least 1");
        cfg.reps = r;
    }
    if out.is_some() {
        cfg.output = out;
    }
    let experiment = experiments::find(&cfg.experiment).ok_or_else(|| {
        anyhow!(
            "unknown experiment `{}`; run `idsim list` for the registered ones",
            cfg.experiment
        )
    })?;
    let outcome = experiment.run(&mut cfg)?;

    let report = Report {
        version: env!("CARGO_PKG_VERSION"),
        experiment: experiment.name,
        verdict: outcome.verdict,
        config: &cfg,
        result: outcome.result,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &cfg.output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let (Some(p), Some(table)) = (&cfg.csv, &outcome.table) {
        write_csv(p, table)?;
    }
    Ok(outcome.verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", experiments::listing());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            reps,
            out,
        } => match run(&config, seed, reps, out) {
            Ok(Verdict::Fail) => {
                eprintln!("identity check failed");
                ExitCode::from(EXIT_FAIL)
            }
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_ERROR)
            }
        },
    }
}
