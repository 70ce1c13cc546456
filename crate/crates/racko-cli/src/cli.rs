//! Command-line surface: `racko evolve | play | validate | gen-random`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "racko", version, about = "Rack'O engine, scripted agents and script evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve a playing script and write the run's artifacts.
    Evolve(EvolveArgs),
    /// Pit two policies against each other with balanced seating.
    Play(PlayArgs),
    /// Parse a script file (lenient syntax) and echo its canonical form.
    Validate(ValidateArgs),
    /// Sample one random script from the grammar.
    GenRandom(GenRandomArgs),
}

/// Canned experiment presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Case1,
    Case2,
    Case3,
}

#[derive(Args, Debug, Default)]
pub struct EvolveArgs {
    /// Canned run parameters (case1 | case2 | case3). Explicit flags or
    /// file values that contradict the preset are rejected.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// JSON config file; keys mirror the run-parameter names below.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Population size (P).
    #[arg(long, value_name = "P")]
    pub population: Option<usize>,

    /// Generations to run (G).
    #[arg(long, value_name = "G")]
    pub generations: Option<usize>,

    /// Individuals carried over verbatim each generation (k).
    #[arg(long, value_name = "K")]
    pub elites: Option<usize>,

    /// Individuals sampled per tournament (t).
    #[arg(long, value_name = "T")]
    pub tournament: Option<usize>,

    /// Games per ordered pairing (n).
    #[arg(long, value_name = "N")]
    pub games: Option<usize>,

    /// Times each ordered pairing is repeated (m).
    #[arg(long, value_name = "M")]
    pub repeats: Option<usize>,

    /// Plies before a game is scored as a draw.
    #[arg(long, value_name = "PLIES")]
    pub turn_cap: Option<u32>,

    /// Master seed; every game and random draw derives from it.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for history.csv, best.script, run.json and the
    /// per-generation gen-<N>.script files.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    /// First policy: script:<path> | baseline | random.
    pub p1: String,

    /// Second policy: script:<path> | baseline | random.
    pub p2: String,

    /// Total games; seating alternates so each side starts half of them.
    #[arg(long, default_value_t = 1000)]
    pub games: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Plies before a game is scored as a draw.
    #[arg(long, default_value_t = 200, value_name = "PLIES")]
    pub turn_cap: u32,

    /// Also write the per-seat and combined stats as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Script file to check.
    pub path: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenRandomArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cap on rules per script (also caps the initial rule count).
    #[arg(long, value_name = "N")]
    pub max_rules: Option<usize>,

    /// Cap on predicates per rule.
    #[arg(long, value_name = "N")]
    pub max_conjuncts: Option<usize>,
}
