use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bmap_lab::experiments;
use bmap_lab::{ExperimentCfg, LabError, WeightSpec};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bmap", version, about = "Boundaries of bipartite Boltzmann planar maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Config file (`key = value` lines), or a report to reproduce.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Type a, Z_q and r_q of the weight sequence.
    Classify,
    /// Normalized F and F-hat coefficients.
    Series,
    /// Boundary offspring laws.
    Laws,
    /// Edge list of one scooped-out boundary at the first grid size.
    Sample,
    /// Diameter and height of the boundary over the grid.
    ExpScaling,
    /// Local law of the boundary near its root against the limit.
    ExpLocal,
    /// Loop length tail and Hill index at the largest grid size.
    ExpTail,
    /// Closed-form checks for the q* sequence.
    ExpQstar,
    /// Partition function oracles and functional relation residuals.
    ExpPartition,
}

fn load(cli: &Cli) -> Result<ExperimentCfg, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentCfg::from_file(p)?,
        None if matches!(cli.cmd, Cmd::ExpQstar | Cmd::ExpPartition) => ExperimentCfg::new(WeightSpec::Zero),
        None => {
            return Err(LabError::Config {
                line: 0,
                msg: "--config is required for this command".into(),
            })
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), LabError> {
    let cfg = load(cli)?;
    let text = match cli.cmd {
        Cmd::Classify => experiments::classify(&cfg)?,
        Cmd::Series => experiments::series_dump(&cfg)?.render()?,
        Cmd::Laws => experiments::law_dump(&cfg)?.render()?,
        Cmd::Sample => experiments::sample_scoop(&cfg)?,
        Cmd::ExpScaling => experiments::run_scaling(&cfg)?.report.render()?,
        Cmd::ExpLocal => experiments::run_local(&cfg)?.report.render()?,
        Cmd::ExpTail => experiments::run_tail(&cfg)?.report.render()?,
        Cmd::ExpQstar => experiments::run_qstar(&cfg)?.report.render()?,
        Cmd::ExpPartition => experiments::run_partition_check(&cfg)?.report.render()?,
    };
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bmap: {e}");
            ExitCode::FAILURE
        }
    }
}
