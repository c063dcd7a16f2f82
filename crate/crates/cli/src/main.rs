use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use pathsmooth_cli::{run, CliError, Command, Config, Overrides};

/// Particle smoothing experiments for hidden Markov models.
#[derive(Parser)]
#[command(name = "pathsmooth", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate (or load) observations and write them with the manifest.
    Simulate(Common),
    /// Run the configured smoother once and dump the path ensemble.
    Smooth(Common),
    /// Effective sample size per time step over the configured repetitions.
    Neff(Common),
    /// Single-run variance estimates against the spread over repetitions.
    Clt(Common),
    /// Mean squared error of the improved estimator against the pass count.
    MsePasses(Common),
    /// Particle counts matching experiment.cpu_budget for each algorithm.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Seed; overrides experiment.seed and the PATHSMOOTH_SEED variable.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of particles N.
    #[arg(long)]
    n: Option<usize>,
    /// Number of improvement passes K.
    #[arg(long)]
    k: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cmd: Cmd) -> Result<(), CliError> {
    let (command, c) = match cmd {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Smooth(c) => (Command::Smooth, c),
        Cmd::Neff(c) => (Command::Neff, c),
        Cmd::Clt(c) => (Command::Clt, c),
        Cmd::MsePasses(c) => (Command::MsePasses, c),
        Cmd::Calibrate(c) => (Command::Calibrate, c),
    };
    let overrides = Overrides { seed: c.seed, n: c.n, k: c.k, out: c.out, threads: c.threads };
    let cfg = Config::load(&c.config)?.resolve(&overrides)?;
    let manifest = run(command, &cfg)?;
    for f in &manifest.outputs {
        println!("{}", cfg.output.dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pathsmooth: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
