use std::path::PathBuf;
use std::process::ExitCode;

use bundle_auction::experiment::{parse_config, run, Command};
use bundle_auction::montecarlo::configure_threads_from_env;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bundle-auction-lab",
    version,
    about = "Customer-bundling auction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Optimal single price for each configured distribution.
    SingleOpt(Common),
    /// Best two-customer bundle offer.
    PairOpt(Common),
    /// Epsilon-offer against optimal separate pricing.
    VerifyThm1(Common),
    /// Large-bundle revenue against its lower and upper bounds.
    VerifyThm2(Common),
    /// Mixed population of pairs, triples and groups of six.
    Partition(Common),
    /// Evaluate the offers listed in the config.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (stdout when neither this nor the config sets one).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::SingleOpt(c) => (Command::SingleOpt, c),
            Sub::PairOpt(c) => (Command::PairOpt, c),
            Sub::VerifyThm1(c) => (Command::VerifyThm1, c),
            Sub::VerifyThm2(c) => (Command::VerifyThm2, c),
            Sub::Partition(c) => (Command::Partition, c),
            Sub::Sweep(c) => (Command::Sweep, c),
        }
    }
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    match go(command, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn go(command: Command, args: Common) -> bundle_auction::Result<bool> {
    configure_threads_from_env()?;
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = parse_config(&text)?;
    config.command = command;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(samples) = args.samples {
        config.n_samples = samples;
    }
    if args.out.is_some() {
        config.out = args.out;
    }
    let report = run(&config)?;
    if config.out.is_none() {
        print!("{}", report.to_csv_string()?);
    }
    eprintln!("{}", report.footer());
    Ok(report.verified != Some(false))
}
