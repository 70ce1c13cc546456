use clap::error::ErrorKind;
use clap::Parser;

use racko_cli::cli::{Cli, Command};
use racko_cli::commands::{cmd_evolve, cmd_gen_random, cmd_play, cmd_validate, HarnessError};

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    // RACKO_THREADS caps evaluation concurrency; the pool must be pinned
    // before any parallel work touches it.
    if let Ok(raw) = std::env::var("RACKO_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("the global thread pool is configured exactly once");
            }
            _ => {
                eprintln!("RACKO_THREADS must be a positive integer, got `{raw}`");
                return 1;
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{err}");
            return 0;
        }
        Err(err) => {
            eprint!("{err}");
            return 1;
        }
    };

    let outcome = match &cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Play(args) => cmd_play(args),
        Command::Validate(args) => cmd_validate(args),
        Command::GenRandom(args) => cmd_gen_random(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(HarnessError::Usage(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(HarnessError::Runtime(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}
