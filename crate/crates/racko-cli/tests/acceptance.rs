//! Acceptance suite: the eight release gates for this workspace, one test
//! per criterion so the harness prints a pass/fail line for each. Each test
//! also prints a one-line summary with its measured numbers (visible under
//! `--nocapture`, or whenever a gate fails).
//!
//! Criteria 6, 7 and 8 all examine the same `case1` evolution run. The run
//! is produced once, lazily, in [`case1_runs`]: two subprocess executions of
//! `evolve --preset case1` under different `RACKO_THREADS` settings plus an
//! in-process execution of the identical configuration (whose report exposes
//! the per-generation populations the file artifacts do not).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use racko::agent::{ActionContext, PolicySpec, UsageCounters};
use racko::dsl::{
    eval_predicate, parse_script, random_script, serialize_script, GrammarConfig, Predicate,
    Script,
};
use racko::evolve::{
    derive_seed, elite, ezs, play_scripts_traced, remove_unused, schedule, GAConfig, Individual,
};
use racko::game::{Action, Card, EngineConfig, GameState, Rack};
use racko_cli::commands::play_balanced;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

// ===== helpers ==========================================================

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

/// The multiset of all 40 card values, wherever the cards sit, must always
/// be exactly 0..40 — and an empty deck must mean the discard pile was just
/// recycled down to at most its top card.
fn assert_all_forty(state: &GameState) {
    let mut cards: Vec<u8> = Vec::with_capacity(40);
    cards.extend(state.deck().iter().map(|card| card.0));
    cards.extend(state.discard().iter().map(|card| card.0));
    for player in 0..2 {
        cards.extend(state.rack(player).slots().iter().map(|card| card.0));
    }
    cards.sort_unstable();
    let expected: Vec<u8> = (0..40).collect();
    assert_eq!(cards, expected, "the card multiset must stay intact");
    if state.deck().is_empty() {
        assert!(
            state.discard().len() <= 1,
            "an empty deck implies the discard pile was recycled"
        );
    }
}

/// Independent win-condition oracle: sort a copy and compare.
fn ascending_by_sort(slots: &[Card]) -> bool {
    let original: Vec<u8> = slots.iter().map(|card| card.0).collect();
    let mut sorted = original.clone();
    sorted.sort_unstable();
    sorted == original && sorted.windows(2).all(|pair| pair[0] < pair[1])
}

/// A rack of 5 distinct cards drawn uniformly from the 40-card deck.
fn random_rack(rng: &mut impl Rng) -> Rack {
    let picks = rand::seq::index::sample(rng, 40, 5);
    Rack::new(picks.iter().map(|value| Card(value as u8)).collect())
}

/// The context a `Pass` decision sees: no placement, hand unchanged.
fn pass_context(hand: Rack) -> ActionContext {
    ActionContext {
        action: Action::Pass,
        current_hand: hand.clone(),
        resulting_hand: hand,
        placed_value: None,
        placed_slot: None,
    }
}

// ===== criterion 1: conservation fuzz ===================================

#[test]
fn criterion_1_conservation_holds_under_random_play() {
    let start = Instant::now();
    let mut master = ChaCha8Rng::seed_from_u64(0xACC0);
    for _ in 0..1_000 {
        let mut state = GameState::new(master.gen(), &EngineConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        assert_all_forty(&state);
        for _ in 0..200 {
            let actions = state.legal_actions();
            let action = actions[rng.gen_range(0..actions.len())];
            state.apply(action).expect("a listed legal action must apply");
            assert_all_forty(&state);
            if state.winner().is_some() {
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "conservation fuzz took {elapsed:?}, budget is 10 s"
    );
    println!("criterion 1: PASS - 1000 random games, 0 conservation violations, {elapsed:?}");
}

// ===== criterion 2: win-condition oracles ===============================

#[test]
fn criterion_2_racko_oracles_agree_on_one_hundred_thousand_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);

    // hasRacko against the sort-and-compare oracle.
    for _ in 0..100_000 {
        let rack = random_rack(&mut rng);
        let expected = ascending_by_sort(rack.slots());
        assert_eq!(rack.is_racko(), expected);
        let ctx = pass_context(rack);
        assert_eq!(eval_predicate(&Predicate::HasRacko, &ctx), expected);
    }

    // givesRacko against hasRacko evaluated on the resulting hand.
    for _ in 0..100_000 {
        let picks = rand::seq::index::sample(&mut rng, 40, 6).into_vec();
        let rack = Rack::new(picks[..5].iter().map(|&value| Card(value as u8)).collect());
        let incoming = Card(picks[5] as u8);
        let slot = rng.gen_range(0..5);
        let resulting = rack.with_replaced(slot, incoming);
        let swap = ActionContext {
            action: Action::TakeDeck(slot),
            current_hand: rack,
            resulting_hand: resulting.clone(),
            placed_value: Some(incoming),
            placed_slot: Some(slot),
        };
        let gives = eval_predicate(&Predicate::GivesRacko, &swap);
        let has_on_resulting =
            eval_predicate(&Predicate::HasRacko, &pass_context(resulting.clone()));
        assert_eq!(gives, has_on_resulting);
        assert_eq!(gives, ascending_by_sort(resulting.slots()));
    }

    println!("criterion 2: PASS - 100000 racks and 100000 swap contexts, 100% oracle agreement");
}

// ===== criterion 3: parser fidelity =====================================

#[test]
fn criterion_3_published_and_random_scripts_round_trip() {
    for (name, rules) in [("case1.script", 7usize), ("case2.script", 17), ("case3.script", 9)] {
        let text = fs::read_to_string(fixture(name)).expect("fixture should be readable");
        let script =
            parse_script(&text).unwrap_or_else(|error| panic!("{name} should parse: {error}"));
        assert_eq!(script.rules.len(), rules, "{name} rule count");
        let canonical = serialize_script(&script);
        let reparsed = parse_script(&canonical).expect("canonical text should parse");
        assert_eq!(reparsed, script, "{name}: round-trip must be an AST identity");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let grammar = GrammarConfig::default();
    for index in 0..1_000 {
        let script = random_script(&mut rng, &grammar);
        let reparsed = parse_script(&serialize_script(&script)).expect("should reparse");
        assert_eq!(reparsed, script, "random script {index} must round-trip");
    }

    println!("criterion 3: PASS - 3 published scripts (7/17/9 rules) and 1000 random scripts round-trip");
}

// ===== criterion 4: baseline strength ===================================

/// One-sided binomial tail ln P[X >= wins] for X ~ Bin(games, 1/2),
/// computed in log space so tiny p-values stay representable.
fn ln_binomial_tail_at_half(games: u64, wins: u64) -> f64 {
    if 2 * wins <= games {
        return 0.0; // p >= ~0.5: reject without arithmetic
    }
    // ln C(games, wins), built from the smaller symmetric side.
    let mut ln_choose = 0.0_f64;
    for i in 1..=(games - wins) {
        ln_choose += ((wins + i) as f64).ln() - (i as f64).ln();
    }
    // Tail terms relative to the first: C(games, k)/C(games, wins) for
    // k = wins..=games shrink monotonically because wins > games/2.
    let mut tail = 0.0_f64;
    let mut term = 1.0_f64;
    for k in wins..=games {
        tail += term;
        if k < games {
            term *= (games - k) as f64 / (k + 1) as f64;
        }
    }
    ln_choose + (games as f64) * 0.5_f64.ln() + tail.ln()
}

#[test]
fn criterion_4_baseline_beats_random_with_high_confidence() {
    let dir = TempDir::new().expect("temp dir");
    let csv = dir.path().join("probe.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_racko"))
        .args(["play", "baseline", "random", "--games", "2000", "--seed", "0"])
        .args(["--csv", csv.to_str().unwrap()])
        .env("RACKO_THREADS", "1")
        .output()
        .expect("failed to spawn the racko binary");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let body = fs::read_to_string(&csv).expect("play should write the CSV");
    let combined = body
        .lines()
        .find(|line| line.starts_with("combined,"))
        .expect("CSV should carry a combined row");
    let cols: Vec<&str> = combined.split(',').collect();
    let wins: u64 = cols[1].parse().expect("p1 wins column");
    let games: u64 = cols[4].parse().expect("games column");
    assert_eq!(games, 2_000);

    let rate = wins as f64 / games as f64;
    assert!(rate > 0.5, "baseline combined rate {rate} must exceed 0.5");
    let ln_p = ln_binomial_tail_at_half(games, wins);
    assert!(
        ln_p < 0.01_f64.ln(),
        "one-sided binomial ln p = {ln_p:.2} must be below ln 0.01"
    );
    println!("criterion 4: PASS - baseline rate {rate:.4} over 2000 games, ln p = {ln_p:.1}");
}

// ===== criterion 5: published scripts vs the baseline ===================

#[test]
fn criterion_5_published_scripts_lose_overall_but_win_games() {
    for name in ["case1.script", "case2.script", "case3.script"] {
        let script = parse_script(&fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let spec = PolicySpec::Script(script);
        let balanced = play_balanced(&spec, &PolicySpec::Baseline, 1_000, 197, 200);
        let (script_wins, baseline_wins, draws, games) = balanced.combined();
        assert_eq!(games, 1_000);

        let baseline_rate = f64::from(baseline_wins) / f64::from(games);
        assert!(
            (0.50..1.0).contains(&baseline_rate),
            "{name}: baseline rate {baseline_rate:.4} fell outside [0.50, 1.0) - \
             the engine's decision conventions need review"
        );
        assert!(script_wins >= 1, "{name}: the published script must win at least one game");
        if baseline_rate <= 0.55 {
            println!(
                "criterion 5: note - {name} held the baseline to {baseline_rate:.4}, \
                 under the expected 0.55 margin"
            );
        }
        println!(
            "criterion 5: {name} -> baseline rate {baseline_rate:.4}, \
             script wins {script_wins}, draws {draws}"
        );
    }
    println!("criterion 5: PASS - each published script loses overall yet wins games");
}

// ===== shared case1 artifacts for criteria 6-8 ==========================

const CASE1_SEED: u64 = 7;
const PROBE_SEED: u64 = 0xBEEF;

struct Case1Runs {
    _dir: TempDir,
    /// Subprocess run under RACKO_THREADS=4, wall-clock timed.
    run_a: PathBuf,
    elapsed_a: Duration,
    /// Subprocess run under RACKO_THREADS=1.
    run_b: PathBuf,
    /// In-process run of the identical configuration.
    report: racko::evolve::EvolutionReport,
    cfg: GAConfig,
}

fn run_evolve_case1(out_dir: &Path, threads: &str) {
    let out = Command::new(env!("CARGO_BIN_EXE_racko"))
        .args(["evolve", "--preset", "case1", "--seed", &CASE1_SEED.to_string()])
        .args(["--out", out_dir.to_str().unwrap()])
        .env("RACKO_THREADS", threads)
        .output()
        .expect("failed to spawn the racko binary");
    assert!(
        out.status.success(),
        "evolve --preset case1 failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn case1_runs() -> &'static Case1Runs {
    static RUNS: OnceLock<Case1Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let dir = TempDir::new().expect("temp dir");
        let run_a = dir.path().join("threads-4");
        let run_b = dir.path().join("threads-1");

        let started = Instant::now();
        run_evolve_case1(&run_a, "4");
        let elapsed_a = started.elapsed();
        run_evolve_case1(&run_b, "1");

        let mut cfg = GAConfig::case1();
        cfg.seed = CASE1_SEED;
        let report = ezs(&cfg).expect("the case1 configuration is valid");

        Case1Runs { _dir: dir, run_a, elapsed_a, run_b, report, cfg }
    })
}

// ===== criterion 6: evolution beats random search =======================

/// Win rate of one script against the fixed probe pool: 500 seat-balanced
/// games against the baseline plus 500 against the random policy, all under
/// seeds derived from one probe master so every candidate faces the
/// identical pool.
fn probe_win_rate(script: &Script) -> f64 {
    let spec = PolicySpec::Script(script.clone());
    let vs_baseline =
        play_balanced(&spec, &PolicySpec::Baseline, 500, derive_seed(PROBE_SEED, &[1]), 200);
    let vs_random =
        play_balanced(&spec, &PolicySpec::Random, 500, derive_seed(PROBE_SEED, &[2]), 200);
    let (wins_b, _, _, games_b) = vs_baseline.combined();
    let (wins_r, _, _, games_r) = vs_random.combined();
    f64::from(wins_b + wins_r) / f64::from(games_b + games_r)
}

#[test]
fn criterion_6_evolution_beats_random_search_within_budget() {
    let runs = case1_runs();
    assert!(
        runs.elapsed_a < Duration::from_secs(300),
        "evolve --preset case1 took {:?}, budget is 5 minutes",
        runs.elapsed_a
    );

    let best_text = fs::read_to_string(runs.run_a.join("best.script")).unwrap();
    let best = parse_script(&best_text).expect("best.script should parse");
    let evolved = probe_win_rate(&best);

    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut best_random = f64::MIN;
    for _ in 0..10 {
        let candidate = random_script(&mut rng, &runs.cfg.grammar);
        best_random = best_random.max(probe_win_rate(&candidate));
    }

    assert!(
        evolved >= best_random,
        "evolved probe rate {evolved:.4} must reach the best of 10 random scripts ({best_random:.4})"
    );
    println!(
        "criterion 6: PASS - case1 in {:?}, evolved probe rate {evolved:.4} >= best-of-10 random {best_random:.4}",
        runs.elapsed_a
    );
}

// ===== criterion 7: elitism and pruning =================================

/// The pruning step ezs applies between evaluation and breeding, recomputed
/// as a pure function of an evaluated individual.
fn prune(individual: &Individual) -> Individual {
    let script = remove_unused(&individual.script, &individual.usage);
    let counts = individual.usage.counts().iter().copied().filter(|&count| count > 0).collect();
    Individual {
        script,
        fitness: individual.fitness,
        usage: UsageCounters::from_counts(counts),
        games: individual.games,
    }
}

#[test]
fn criterion_7_elites_carry_over_and_pruning_preserves_behavior() {
    let runs = case1_runs();
    let report = &runs.report;
    let cfg = &runs.cfg;

    // The in-process report describes the same run criterion 6 executed:
    // identical seed and configuration, and its winner matches the file
    // byte for byte (criterion 8 pins the subprocess side).
    let file_best = fs::read_to_string(runs.run_a.join("best.script")).unwrap();
    assert_eq!(
        serialize_script(&report.best.script),
        file_best,
        "the in-process run must reproduce the subprocess artifacts"
    );

    assert_eq!(report.trace.len(), cfg.generations, "one evaluated population per generation");
    let mut replayed = 0_u64;
    for generation in 0..cfg.generations {
        let population = &report.trace[generation];
        let pruned: Vec<Individual> = population.iter().map(prune).collect();

        // Elites of this generation (selected after pruning) must open the
        // next generation's evaluated population verbatim.
        if generation + 1 < cfg.generations {
            let elites = elite(&pruned, cfg.elites);
            let next = &report.trace[generation + 1];
            for (rank, carried) in elites.iter().enumerate() {
                assert_eq!(
                    next[rank].script, carried.script,
                    "generation {generation}: elite {rank} must reappear verbatim"
                );
            }
        }

        // Replay every evaluation game of this generation with both scripts
        // pruned; the action transcript and outcome must not change.
        for task in schedule(population.len(), cfg, generation) {
            let (record_a, actions_a) = play_scripts_traced(
                &population[task.i].script,
                &population[task.j].script,
                task.seed,
                cfg.turn_cap,
            );
            let (record_b, actions_b) = play_scripts_traced(
                &pruned[task.i].script,
                &pruned[task.j].script,
                task.seed,
                cfg.turn_cap,
            );
            assert_eq!(
                actions_a, actions_b,
                "generation {generation}, pair ({}, {}), repeat {}, game {}: \
                 pruning changed the transcript",
                task.i, task.j, task.repeat, task.game
            );
            assert_eq!(record_a.winner, record_b.winner);
            replayed += 1;
        }
    }
    println!(
        "criterion 7: PASS - elites verbatim in every generation window; \
         {replayed} evaluation games replay identically after pruning"
    );
}

// ===== criterion 8: determinism across thread counts ====================

#[test]
fn criterion_8_artifacts_are_byte_identical_across_thread_counts() {
    let runs = case1_runs();
    for name in ["history.csv", "best.script"] {
        let a = fs::read(runs.run_a.join(name)).unwrap();
        let b = fs::read(runs.run_b.join(name)).unwrap();
        assert_eq!(
            a, b,
            "{name} must be byte-identical under RACKO_THREADS=4 and RACKO_THREADS=1"
        );
    }
    println!(
        "criterion 8: PASS - history.csv and best.script byte-identical across thread counts"
    );
}
