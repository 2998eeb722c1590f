//! `cliffan`: runs invariant suites and writes series, group, kernel and Stokes artifacts.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cliffan::verify::Suite;
use commands::{read_config, Context, Failure};

#[derive(Parser)]
#[command(name = "cliffan", version, about = "Computational Clifford analysis toolkit")]
struct Cli {
    /// Omit wall-clock fields so repeated runs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for random sampling; overrides any seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flips the sign of e1 e2 so the suites can be seen to fail.
    #[arg(long, global = true, hide = true)]
    mutate_product_sign: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an invariant suite: algebra, group, kernels, series, bvp or all.
    Verify { suite: String },
    /// Evaluate a lattice or orbit series on a point set.
    Series { config: PathBuf },
    /// Solve the Stokes problem across refinement levels.
    Stokes { config: PathBuf },
    /// Enumerate a hypercomplex modular group to a bound.
    Group { config: PathBuf },
    /// Build a derivative of the Cauchy kernel and check it symbolically.
    Kernel { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), Failure> {
    cliffan::clifford::set_product_sign_mutation(cli.mutate_product_sign);
    let ctx = Context {
        out: cli.out,
        seed: cli.seed,
        deterministic: cli.deterministic,
    };
    match cli.command {
        Command::Verify { suite } => {
            let suite: Suite = suite.parse().map_err(|e: cliffan::Error| Failure::Config(e.to_string()))?;
            commands::verify(&ctx, suite)
        }
        Command::Series { config } => commands::series(&ctx, &read_config(&config)?),
        Command::Stokes { config } => commands::stokes(&ctx, &read_config(&config)?),
        Command::Group { config } => commands::group(&ctx, &read_config(&config)?),
        Command::Kernel { config } => commands::kernel(&ctx, &read_config(&config)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Invariant(msg) | Failure::Config(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
