use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hypercell::experiment::{resolve_workers, Command, ExperimentConfig, ExperimentError, Runner};

#[derive(Parser)]
#[command(name = "hypercell", version, about = "Poisson hyperplane tessellation experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON experiment configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "HYPERCELL_WORKERS")]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    SampleCells,
    FacetHist,
    ComplementaryTest,
    ShapeDirect,
    ApproxBench,
    Witness,
    PhiTail,
    Envelope,
    LimitShape,
    Elongation,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::SampleCells => Command::SampleCells,
            Cmd::FacetHist => Command::FacetHist,
            Cmd::ComplementaryTest => Command::ComplementaryTest,
            Cmd::ShapeDirect => Command::ShapeDirect,
            Cmd::ApproxBench => Command::ApproxBench,
            Cmd::Witness => Command::Witness,
            Cmd::PhiTail => Command::PhiTail,
            Cmd::Envelope => Command::Envelope,
            Cmd::LimitShape => Command::LimitShape,
            Cmd::Elongation => Command::Elongation,
        }
    }
}

fn run(cli: Cli) -> Result<String, ExperimentError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ExperimentError::Schema(format!("config `{}`: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let runner = Runner::new(cfg, resolve_workers(cli.workers))?;
    runner.run(cli.command.into(), &cli.out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hypercell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
