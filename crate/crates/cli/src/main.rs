//! `finsler-lab`: batch front-end for curvature, projective, geodesic and
//! comparison-equation campaigns.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;
use failure::Failure;

/// Caps the worker threads of sample-parallel campaigns.
const THREADS_ENV: &str = "FINSLER_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "finsler-lab",
    version,
    about = "Verification campaigns for projectively related Finsler metrics"
)]
struct Cli {
    /// TOML config; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flag-curvature spread, Einstein residual and minimal g-eigenvalue.
    Curvature(Settings),
    /// Rapcsak residual, fitted Einstein constants and Xi relation.
    Projective(Settings),
    /// CSV trace of a unit-speed geodesic.
    Geodesic(Settings),
    /// Closed form, interval and length classes of the comparison equation.
    Ode(Settings),
    /// Runs every acceptance criterion; exit 0 iff all pass.
    VerifyAll(Settings),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numeric(format!("thread pool: {e}")))
}

type Handler = fn(&Settings) -> Result<commands::Outcome, Failure>;

fn run(cli: Cli) -> Result<commands::Outcome, Failure> {
    configure_threads()?;
    let (name, flags, cmd): (&str, &Settings, Handler) = match &cli.command {
        Command::Curvature(s) => ("curvature", s, commands::curvature),
        Command::Projective(s) => ("projective", s, commands::projective),
        Command::Geodesic(s) => ("geodesic", s, commands::geodesic),
        Command::Ode(s) => ("ode", s, commands::ode),
        Command::VerifyAll(s) => ("verify-all", s, commands::verify_all),
    };
    let settings = config::resolve(cli.config.as_deref(), name, flags)?;
    cmd(&settings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) if o.passed => {
            eprintln!("{}", o.message);
            ExitCode::SUCCESS
        }
        Ok(o) => {
            let f = Failure::Assertion(o.message);
            eprintln!("{f}");
            f.exit_code()
        }
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
