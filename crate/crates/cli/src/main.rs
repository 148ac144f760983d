use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use strata_cli::cmd::{eval, generate, render, sample, snap, stats};
use strata_cli::{error_exit_code, Outcome, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "strata", version, about = "Layered-depth dataset generation, rendering and evaluation")]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate scene files and a dataset manifest.
    Generate(generate::GenerateArgs),
    /// Render RGB images and layered ground truth for every manifest record.
    Render(render::RenderArgs),
    /// Sample relative depth tuples from annotations or rendered ground truth.
    Sample(sample::SampleArgs),
    /// Score predictions against layered ground truth.
    Eval(eval::EvalArgs),
    /// Dataset statistics for a rendered manifest.
    Stats(stats::StatsArgs),
    /// Snap LDGT files to a fixed layer count.
    Snap(snap::SnapArgs),
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Render(a) => render::run(a),
        Command::Sample(a) => sample::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Stats(a) => stats::run(a),
        Command::Snap(a) => snap::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("global pool is built once");
    }
    match run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(&outcome.json).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
