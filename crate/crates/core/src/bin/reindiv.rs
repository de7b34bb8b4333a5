use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use reindiv::config::Mode;

#[derive(Parser)]
#[command(name = "reindiv", version, about = "Optimal reinsurance and dividend control on a finite horizon")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the value function and write solution.csv
    Solve(Common),
    /// Solve and extract the dividend and reinsurance boundaries
    Boundaries(Common),
    /// Solve and simulate the feedback policy
    Simulate(Common),
    /// Run every pipeline and every check
    VerifyAll(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and REINDIV_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Simulation seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Solve(a) => (Mode::Solve, a),
        Command::Boundaries(a) => (Mode::Boundaries, a),
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::VerifyAll(a) => (Mode::VerifyAll, a),
    };
    std::process::exit(reindiv::cli::run(mode, &args.config, args.out.as_deref(), args.seed));
}
