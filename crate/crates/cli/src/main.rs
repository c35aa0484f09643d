use clap::{Parser, Subcommand};
use std::process::ExitCode;

mod commands;

#[derive(Parser)]
#[command(
    name = "sigkit",
    version,
    about = "Truncated path signatures, their identities, and tree-metric certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the truncated signature of a CSV path and emit it as JSON
    Sig(commands::SigArgs),
    /// Run the signature identity checks on a CSV path
    Check(commands::CheckArgs),
    /// Validate the iterated-integral reconstruction (H map) on a CSV path
    Hmap(commands::HmapArgs),
    /// Validate a heighted poset and certify its tree metric
    TreeCheck(commands::TreeArgs),
    /// Generate seeded random paths and run the identity battery on each
    Fuzz(commands::FuzzArgs),
}

/// Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 capacity.
fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sig(args) => commands::run_sig(&args),
        Command::Check(args) => commands::run_check(&args),
        Command::Hmap(args) => commands::run_hmap(&args),
        Command::TreeCheck(args) => commands::run_tree_check(&args),
        Command::Fuzz(args) => commands::run_fuzz(&args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                sigkit::Error::Capacity(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
