use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_lab::{run_config, Kind};

#[derive(Parser)]
#[command(name = "nonlocal-lab", version, about = "Run nonlocal parabolic experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem and write its trace.
    Solve(Args),
    /// Build or load a comparison function and check its inequalities.
    Certify(Args),
    /// Map exponents and checked hypotheses to predicted behavior.
    Classify(Args),
    /// Classify (and optionally run) every cell of a parameter grid.
    Sweep(Args),
    /// Run two ordered initial data side by side.
    Compare(Args),
    /// First Dirichlet eigenpair of the grid.
    Eig(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel runs; defaults to the core count.
    #[arg(long)]
    threads: Option<usize>,
    /// Reserved. Every experiment is deterministic and ignores it.
    #[arg(long)]
    seed: Option<u64>,
    /// Write a gnuplot script next to each plottable CSV.
    #[arg(long)]
    emit_gnuplot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Solve(a) => (Kind::Solve, a),
        Command::Certify(a) => (Kind::Certify, a),
        Command::Classify(a) => (Kind::Classify, a),
        Command::Sweep(a) => (Kind::Sweep, a),
        Command::Compare(a) => (Kind::Compare, a),
        Command::Eig(a) => (Kind::Eig, a),
    };
    let _ = args.seed;
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run_config(&args.config, Some(kind), args.out.as_deref(), args.emit_gnuplot) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
