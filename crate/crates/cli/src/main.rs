use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use morozov_cli::commands;
use morozov_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "morozov", version, about = "Regularized data assimilation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config, or a CSV produced by an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Noise seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Discrepancy as a function of epsilon.
    Curve,
    /// Discrepancy-principle solution and its error report.
    Solve,
    /// One report row per value of `sweep_param`.
    Sweep,
    /// H1 error as a function of epsilon.
    ErrorVsEps,
    /// Vertices and triangles of the mesh.
    MeshDump,
    /// Range-complement projection of the data.
    Project,
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.display().to_string();
    }
    cfg.validate()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = PathBuf::from(&cfg.output_dir);
    match cli.command {
        Command::Curve => commands::curve(&cfg, &out),
        Command::Solve => commands::solve_cmd(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out),
        Command::ErrorVsEps => commands::error_vs_eps(&cfg, &out),
        Command::MeshDump => commands::mesh_dump(&cfg, &out),
        Command::Project => commands::project(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
