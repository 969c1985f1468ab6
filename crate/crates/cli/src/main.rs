use std::path::PathBuf;
use std::process::ExitCode;

use awva_cli::{commands, CliError, RunConfig, RunOptions};
use awva_core::ShiftSource;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "awva", version, about = "Adaptive weak-value amplification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config; defaults are used for missing keys or a missing file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Take each spectrum shift from the closed form instead of sampling.
    #[arg(long, global = true)]
    noise_free: bool,

    /// Repetitions per photon count, overriding the config.
    #[arg(long, global = true)]
    repetitions: Option<usize>,

    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Fisher information over (g, Im A_w).
    FisherSurface,
    /// Closed-form spectrum shift over (epsilon, tau).
    ShiftSurface,
    /// Delay error against photon count for both schemes.
    SweepN,
    /// A single adaptive trace.
    Adaptive,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_path = out.clone();
    }
    if let Some(r) = cli.repetitions {
        cfg.repetitions = r;
    }
    if cli.noise_free {
        cfg.adaptive.shift_source = ShiftSource::NoiseFree;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = resolve(cli)?;
    let opts = RunOptions { workers: cli.workers };
    let out = cfg.output_path.display();
    Ok(match cli.command {
        Command::FisherSurface => {
            let surface = commands::fisher_surface(&cfg, &opts)?;
            format!("{} grid points written to {out}", surface.points.len())
        }
        Command::ShiftSurface => {
            let surface = commands::shift_surface(&cfg, &opts)?;
            format!("{} grid points written to {out}", surface.points.len())
        }
        Command::SweepN => {
            let sweep = commands::sweep_n(&cfg, &opts)?;
            format!(
                "{} trials over {} photon counts written to {out} (limit ratio {:.4})",
                sweep.trials.len(),
                sweep.rows.len(),
                sweep.limit_ratio
            )
        }
        Command::Adaptive => {
            let trace = commands::adaptive(&cfg)?;
            format!(
                "{} iterations, stop: {}, tau_hat: {} fs",
                trace.iterations.len(),
                trace.stop_reason,
                trace.tau_hat.map_or("none".to_string(), |t| t.to_string())
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("awva: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
