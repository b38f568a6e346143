use clap::{Parser, Subcommand};
use nambuq_core::harness::commands::{cmd_entropy, cmd_run, cmd_sweep, cmd_verify, parse_list};
use nambuq_core::harness::CliError;
use nambuq_core::rng::resolve_seed;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nambuq", version, about = "Nambu-bracket entropy dynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one config and write its trajectory CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded property suite.
    Verify {
        /// brackets, conservation, nosignal, jacobi, entropy or all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Re-run a config at several values of alpha.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alphas: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the entropies of a probability distribution.
    Entropy {
        #[arg(long, allow_hyphen_values = true)]
        dist: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
    },
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config, out } => {
            let report = cmd_run(&config, &out)?;
            println!("{}", report.to_json());
            if let Some(alarm) = &report.alarm {
                eprintln!("drift alarm: {alarm}");
            }
            Ok(report.exit_code())
        }
        Command::Verify { suite, seed, trials } => {
            let outcome = cmd_verify(&suite, resolve_seed(seed), trials)?;
            print!("{}", outcome.report.table());
            Ok(outcome.exit_code())
        }
        Command::Sweep { config, alphas, out } => {
            let alphas = if alphas.trim().is_empty() {
                Vec::new()
            } else {
                parse_list(&alphas, "--alphas")?
            };
            let report = cmd_sweep(&config, &alphas, &out)?;
            for r in report.rows.iter().filter(|r| !r.message.is_empty()) {
                eprintln!("alpha = {}: {}", r.alpha, r.message);
            }
            Ok(report.exit_code())
        }
        Command::Entropy { dist, alpha, base } => {
            print!("{}", cmd_entropy(&dist, alpha, base)?.lines());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
