//! The four subcommands. Each returns `Ok(())` for exit 0 or a
//! [`HarnessError`] that main maps to exit 1 (usage/config) or 2 (runtime
//! fault). Every output file is byte-reproducible under the same seed and
//! flags: no timestamps, no platform-dependent formatting, LF endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use racko::agent::PolicySpec;
use racko::dsl::{parse_script, random_script, serialize_script, GrammarConfig};
use racko::evolve::{derive_seed, evaluation, ezs, MatchStats};

use crate::cli::{EvolveArgs, GenRandomArgs, PlayArgs, ValidateArgs};
use crate::config::{resolve, ResolveError};

#[derive(Debug)]
pub enum HarnessError {
    /// Bad arguments, unreadable/invalid config or script input → exit 1.
    Usage(String),
    /// Failure while doing the work (output IO and the like) → exit 2.
    Runtime(String),
}

impl From<ResolveError> for HarnessError {
    fn from(err: ResolveError) -> Self {
        HarnessError::Usage(err.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents)
        .map_err(|e| HarnessError::Runtime(format!("cannot write {}: {e}", path.display())))
}

// ===== evolve ===========================================================

pub fn cmd_evolve(args: &EvolveArgs) -> Result<(), HarnessError> {
    let run = resolve(args)?;
    fs::create_dir_all(&run.out_dir).map_err(|e| {
        HarnessError::Runtime(format!("cannot create {}: {e}", run.out_dir.display()))
    })?;

    let report = ezs(&run.ga).map_err(|e| HarnessError::Usage(e.to_string()))?;

    let mut history = String::from(
        "generation,best_fitness,mean_fitness,population_size,best_script_path\n",
    );
    for record in &report.records {
        let script_name = format!("gen-{}.script", record.generation);
        write_file(&run.out_dir.join(&script_name), &record.best_script)?;
        writeln!(
            history,
            "{},{:.6},{:.6},{},{}",
            record.generation,
            record.best_fitness,
            record.mean_fitness,
            run.ga.population_size,
            script_name
        )
        .expect("string formatting is infallible");
    }
    write_file(&run.out_dir.join("history.csv"), &history)?;

    // best.script appears atomically: never a partial file on failure.
    let staged = run.out_dir.join("best.script.tmp");
    write_file(&staged, &serialize_script(&report.best.script))?;
    let final_path = run.out_dir.join("best.script");
    fs::rename(&staged, &final_path).map_err(|e| {
        HarnessError::Runtime(format!("cannot finalize {}: {e}", final_path.display()))
    })?;

    let echo = serde_json::to_string_pretty(&run)
        .map_err(|e| HarnessError::Runtime(format!("cannot encode run.json: {e}")))?;
    write_file(&run.out_dir.join("run.json"), &format!("{echo}\n"))?;

    for record in &report.records {
        println!(
            "generation {}: best {:.6}, mean {:.6}",
            record.generation, record.best_fitness, record.mean_fitness
        );
    }
    println!(
        "best script ({} rules, fitness {:.6}) -> {}",
        report.best.script.rules.len(),
        report.best.fitness,
        final_path.display()
    );
    Ok(())
}

// ===== play =============================================================

/// Both halves of a seat-balanced match, reported from p1's side.
pub struct Balanced {
    pub p1_first: MatchStats,
    pub p2_first: MatchStats,
}

impl Balanced {
    /// Totals over both halves as `(p1_wins, p2_wins, draws, games)`.
    pub fn combined(&self) -> (u32, u32, u32, u32) {
        let p1 = self.p1_first.wins_p1 + self.p2_first.wins_p2;
        let p2 = self.p1_first.wins_p2 + self.p2_first.wins_p1;
        let draws = self.p1_first.draws + self.p2_first.draws;
        let games = self.p1_first.games + self.p2_first.games;
        (p1, p2, draws, games)
    }
}

/// Play `games` total: the first ⌈games/2⌉ with p1 seated as player 0, the
/// rest with p2 seated first, under seeds derived per half.
pub fn play_balanced(
    p1: &PolicySpec,
    p2: &PolicySpec,
    games: usize,
    seed: u64,
    turn_cap: u32,
) -> Balanced {
    let first = games.div_ceil(2);
    let second = games - first;
    let p1_first = evaluation(p1, p2, first, derive_seed(seed, &[0]), turn_cap);
    let p2_first = if second > 0 {
        evaluation(p2, p1, second, derive_seed(seed, &[1]), turn_cap)
    } else {
        MatchStats::default()
    };
    Balanced { p1_first, p2_first }
}

fn rate(wins: u32, games: u32) -> f64 {
    if games == 0 { 0.0 } else { f64::from(wins) / f64::from(games) }
}

pub fn cmd_play(args: &PlayArgs) -> Result<(), HarnessError> {
    if args.games == 0 {
        return Err(HarnessError::Usage("--games must be at least 1".into()));
    }
    if args.turn_cap == 0 {
        return Err(HarnessError::Usage("--turn-cap must be at least 1".into()));
    }
    let p1 = PolicySpec::from_cli(&args.p1).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let p2 = PolicySpec::from_cli(&args.p2).map_err(|e| HarnessError::Usage(e.to_string()))?;

    let match_up = play_balanced(&p1, &p2, args.games, args.seed, args.turn_cap);
    let (p1_wins, p2_wins, draws, games) = match_up.combined();

    let mut csv = String::from("section,p1_wins,p2_wins,draws,games,p1_win_rate,p2_win_rate\n");
    let sections = [
        (
            "p1_first",
            match_up.p1_first.wins_p1,
            match_up.p1_first.wins_p2,
            match_up.p1_first.draws,
            match_up.p1_first.games,
        ),
        (
            "p2_first",
            match_up.p2_first.wins_p2,
            match_up.p2_first.wins_p1,
            match_up.p2_first.draws,
            match_up.p2_first.games,
        ),
        ("combined", p1_wins, p2_wins, draws, games),
    ];
    for (section, for_p1, for_p2, drawn, total) in sections {
        println!(
            "{section:>9}: p1 {for_p1:5}  p2 {for_p2:5}  draws {drawn:5}  of {total:5}  (p1 rate {:.6}, p2 rate {:.6})",
            rate(for_p1, total),
            rate(for_p2, total),
        );
        writeln!(
            csv,
            "{section},{for_p1},{for_p2},{drawn},{total},{:.6},{:.6}",
            rate(for_p1, total),
            rate(for_p2, total),
        )
        .expect("string formatting is infallible");
    }

    if let Some(path) = &args.csv {
        write_file(path, &csv)?;
    }
    Ok(())
}

// ===== validate =========================================================

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), HarnessError> {
    let text = fs::read_to_string(&args.path).map_err(|e| {
        HarnessError::Usage(format!("cannot read {}: {e}", args.path.display()))
    })?;
    let script = parse_script(&text)
        .map_err(|e| HarnessError::Usage(format!("{}: {e}", args.path.display())))?;
    print!("{}", serialize_script(&script));
    Ok(())
}

// ===== gen-random =======================================================

pub fn cmd_gen_random(args: &GenRandomArgs) -> Result<(), HarnessError> {
    let mut grammar = GrammarConfig::default();
    if let Some(max_rules) = args.max_rules {
        grammar.max_rules = max_rules;
        // Keep the initial-count range inside the new cap.
        let (lo, hi) = grammar.initial_rule_count_range;
        grammar.initial_rule_count_range = (lo.min(max_rules), hi.min(max_rules));
    }
    if let Some(max_conjuncts) = args.max_conjuncts {
        grammar.max_conjuncts = max_conjuncts;
    }
    grammar.validate().map_err(HarnessError::Usage)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let script = random_script(&mut rng, &grammar);
    print!("{}", serialize_script(&script));
    Ok(())
}
