//! EZS: the generational loop that breeds playing scripts.
//!
//! - [`evaluation`] plays an n-game match between two policies
//! - [`eval_population`] runs the full round-robin over ordered pairs and
//!   turns win counts into per-individual fitness and rule-usage tallies
//! - [`elite`], [`tournament_select`], [`crossover`], [`mutate`] and
//!   [`remove_unused`] are the breeding operators
//! - [`ezs`] wires them into the loop and returns an [`EvolutionReport`]
//!
//! Everything derives from a single master seed through [`derive_seed`],
//! and evaluation games are scheduled up front and reduced in schedule
//! order, so results never depend on thread count or timing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agent::{PolicySpec, ScriptPolicy, UsageCounters};
use crate::dsl::{random_rule, random_script, serialize_script, GrammarConfig, Rule, Script};
use crate::game::{play_game, play_game_traced, Action, Outcome, PlayerId};

// ===== seed derivation ==================================================

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

// Seed-chain namespaces, so initialization, evaluation, breeding and
// per-seat policy streams never collide.
const TAG_INIT: u64 = 1;
const TAG_GAMES: u64 = 2;
const TAG_BREED: u64 = 3;
const TAG_SEAT0: u64 = 4;
const TAG_SEAT1: u64 = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a tag chain into a master seed with splitmix64 scrambles. Every
/// derived seed in the crate comes from here, which is what lets any
/// single game be replayed in isolation.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ GOLDEN);
    for &tag in tags {
        state = splitmix64(state ^ splitmix64(tag));
    }
    state
}

// ===== match evaluation =================================================

/// Win/loss/draw tallies for one match, from player 1's perspective first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchStats {
    pub wins_p1: u32,
    pub wins_p2: u32,
    pub draws: u32,
    pub games: u32,
}

impl MatchStats {
    pub fn rate_p1(&self) -> f64 {
        if self.games == 0 { 0.0 } else { f64::from(self.wins_p1) / f64::from(self.games) }
    }

    pub fn rate_p2(&self) -> f64 {
        if self.games == 0 { 0.0 } else { f64::from(self.wins_p2) / f64::from(self.games) }
    }

    pub fn record(&mut self, winner: Option<PlayerId>) {
        match winner {
            Some(0) => self.wins_p1 += 1,
            Some(_) => self.wins_p2 += 1,
            None => self.draws += 1,
        }
        self.games += 1;
    }
}

/// Play `n` games with `s1` seated as player 0. Game `g` runs under
/// `derive_seed(seed, [g])`; policy randomness (when a seat is the random
/// policy) comes from per-seat sub-seeds of that game seed.
pub fn evaluation(s1: &PolicySpec, s2: &PolicySpec, n: usize, seed: u64, turn_cap: u32) -> MatchStats {
    assert!(n >= 1, "a match needs at least one game");
    let mut stats = MatchStats::default();
    for game in 0..n {
        let game_seed = derive_seed(seed, &[game as u64]);
        let mut p0 = s1.instantiate(derive_seed(game_seed, &[TAG_SEAT0]));
        let mut p1 = s2.instantiate(derive_seed(game_seed, &[TAG_SEAT1]));
        let result =
            play_game(&mut p0, &mut p1, game_seed, turn_cap).expect("built-in policies never fault");
        match result.outcome {
            Outcome::Win(p) => stats.record(Some(p)),
            Outcome::Draw => stats.record(None),
        }
    }
    stats
}

/// Outcome of a single scripted evaluation game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub winner: Option<PlayerId>,
    /// Rule-usage tallies for seat 0 and seat 1.
    pub usage: [UsageCounters; 2],
}

/// One seeded game between two scripts; the seed drives the deal and any
/// reshuffles.
pub fn play_scripts(s0: &Script, s1: &Script, game_seed: u64, turn_cap: u32) -> GameRecord {
    let mut p0 = ScriptPolicy::new(s0.clone());
    let mut p1 = ScriptPolicy::new(s1.clone());
    let result =
        play_game(&mut p0, &mut p1, game_seed, turn_cap).expect("script policies never fault");
    let winner = match result.outcome {
        Outcome::Win(p) => Some(p),
        Outcome::Draw => None,
    };
    GameRecord { winner, usage: [p0.into_counters(), p1.into_counters()] }
}

/// [`play_scripts`] plus the full action transcript, for replay audits.
pub fn play_scripts_traced(
    s0: &Script,
    s1: &Script,
    game_seed: u64,
    turn_cap: u32,
) -> (GameRecord, Vec<Action>) {
    let mut p0 = ScriptPolicy::new(s0.clone());
    let mut p1 = ScriptPolicy::new(s1.clone());
    let (result, transcript) = play_game_traced(&mut p0, &mut p1, game_seed, turn_cap)
        .expect("script policies never fault");
    let winner = match result.outcome {
        Outcome::Win(p) => Some(p),
        Outcome::Draw => None,
    };
    (GameRecord { winner, usage: [p0.into_counters(), p1.into_counters()] }, transcript)
}

// ===== population & configuration =======================================

/// A script plus the bookkeeping from its latest evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub script: Script,
    /// Win fraction over this individual's games in the generation.
    pub fitness: f64,
    /// Rule-usage tallies aggregated over those games; always aligned with
    /// the script's rule list.
    pub usage: UsageCounters,
    /// Games played in the latest evaluation (0 before any).
    pub games: u32,
}

impl Individual {
    pub fn new(script: Script) -> Self {
        let usage = UsageCounters::new(script.rules.len());
        Individual { script, fitness: 0.0, usage, games: 0 }
    }
}

/// Knobs for one evolution run. Defaults match experiment case 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GAConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Top individuals copied verbatim into the next generation (k).
    pub elites: usize,
    /// Individuals sampled per tournament (t).
    pub tournament_size: usize,
    /// Games per match, i.e. per ordered pair per repeat (n).
    pub games_per_match: usize,
    /// Times each ordered pair is matched (m).
    pub repeats_per_seat: usize,
    /// Plies before a game is scored as a draw.
    pub turn_cap: u32,
    pub seed: u64,
    pub grammar: GrammarConfig,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig::case1()
    }
}

impl GAConfig {
    /// Experiment case 1: population 10, generations 4, elites 7,
    /// tournaments 5.
    pub fn case1() -> Self {
        GAConfig {
            population_size: 10,
            generations: 4,
            elites: 7,
            tournament_size: 5,
            games_per_match: 100,
            repeats_per_seat: 3,
            turn_cap: 200,
            seed: 0,
            grammar: GrammarConfig::default(),
        }
    }

    /// Experiment case 2: population 20, generations 6, elites 7,
    /// tournaments 7.
    pub fn case2() -> Self {
        GAConfig {
            population_size: 20,
            generations: 6,
            elites: 7,
            tournament_size: 7,
            ..GAConfig::case1()
        }
    }

    /// Experiment case 3: population 30, generations 8, elites 10,
    /// tournaments 10.
    pub fn case3() -> Self {
        GAConfig {
            population_size: 30,
            generations: 8,
            elites: 10,
            tournament_size: 10,
            ..GAConfig::case1()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size < 2 {
            return Err(ConfigError::PopulationTooSmall(self.population_size));
        }
        if self.generations == 0 {
            return Err(ConfigError::NoGenerations);
        }
        if self.elites == 0 || self.elites > self.population_size {
            return Err(ConfigError::BadElites {
                elites: self.elites,
                population: self.population_size,
            });
        }
        if self.tournament_size < 2 || self.tournament_size > self.population_size {
            return Err(ConfigError::BadTournament {
                tournament: self.tournament_size,
                population: self.population_size,
            });
        }
        if self.games_per_match == 0 {
            return Err(ConfigError::NoGames);
        }
        if self.repeats_per_seat == 0 {
            return Err(ConfigError::NoRepeats);
        }
        if self.turn_cap == 0 {
            return Err(ConfigError::NoTurnCap);
        }
        self.grammar.validate().map_err(ConfigError::Grammar)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("population_size must be at least 2 (got {0})")]
    PopulationTooSmall(usize),
    #[error("generations must be at least 1")]
    NoGenerations,
    #[error("elites must satisfy 1 <= elites <= population_size (got {elites} for population {population})")]
    BadElites { elites: usize, population: usize },
    #[error("tournament_size must satisfy 2 <= tournament_size <= population_size (got {tournament} for population {population})")]
    BadTournament { tournament: usize, population: usize },
    #[error("games_per_match must be at least 1")]
    NoGames,
    #[error("repeats_per_seat must be at least 1")]
    NoRepeats,
    #[error("turn_cap must be at least 1")]
    NoTurnCap,
    #[error("grammar: {0}")]
    Grammar(String),
}

// ===== population evaluation ============================================

/// One evaluation game in a generation's schedule: population indices `i`
/// (seat 0) and `j` (seat 1), the ordered-pair counter, repeat and game
/// indices, and the derived game seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameTask {
    pub pair: usize,
    pub i: usize,
    pub j: usize,
    pub repeat: usize,
    pub game: usize,
    pub seed: u64,
}

/// The full, ordered game schedule for one generation: every ordered pair
/// (i, j), i ≠ j, times `repeats_per_seat`, times `games_per_match`. The
/// ordered-pair sweep covers both seatings, so each individual sits as
/// player 0 in exactly half its games. Reduction follows this order, which
/// is what makes evaluation independent of how the games are scheduled.
pub fn schedule(population: usize, cfg: &GAConfig, generation: usize) -> Vec<GameTask> {
    let pairs = population * population.saturating_sub(1);
    let mut tasks = Vec::with_capacity(pairs * cfg.repeats_per_seat * cfg.games_per_match);
    let mut pair = 0;
    for i in 0..population {
        for j in 0..population {
            if i == j {
                continue;
            }
            for repeat in 0..cfg.repeats_per_seat {
                for game in 0..cfg.games_per_match {
                    let seed = derive_seed(
                        cfg.seed,
                        &[TAG_GAMES, generation as u64, pair as u64, repeat as u64, game as u64],
                    );
                    tasks.push(GameTask { pair, i, j, repeat, game, seed });
                }
            }
            pair += 1;
        }
    }
    tasks
}

/// Evaluate a whole population in round-robin: play the generation's
/// schedule (concurrently — games are mutually independent), then reduce
/// in schedule order. Rewrites each individual's fitness (wins ÷ games,
/// with 0 games defined as fitness 0), usage tallies and game count.
pub fn eval_population(pop: &mut [Individual], cfg: &GAConfig, generation: usize) {
    assert!(!pop.is_empty(), "cannot evaluate an empty population");
    for ind in pop.iter_mut() {
        ind.fitness = 0.0;
        ind.usage = UsageCounters::new(ind.script.rules.len());
        ind.games = 0;
    }
    let tasks = schedule(pop.len(), cfg, generation);
    if tasks.is_empty() {
        return; // single individual: no opponents, fitness stays 0
    }
    let snapshot: &[Individual] = pop;
    let records: Vec<GameRecord> = tasks
        .par_iter()
        .map(|t| play_scripts(&snapshot[t.i].script, &snapshot[t.j].script, t.seed, cfg.turn_cap))
        .collect();
    let mut wins = vec![0u32; pop.len()];
    for (task, record) in tasks.iter().zip(&records) {
        pop[task.i].games += 1;
        pop[task.j].games += 1;
        match record.winner {
            Some(0) => wins[task.i] += 1,
            Some(_) => wins[task.j] += 1,
            None => {}
        }
        pop[task.i].usage.merge(&record.usage[0]);
        pop[task.j].usage.merge(&record.usage[1]);
    }
    for (ind, w) in pop.iter_mut().zip(wins) {
        ind.fitness = if ind.games == 0 { 0.0 } else { f64::from(w) / f64::from(ind.games) };
    }
}

// ===== breeding operators ===============================================

/// The `k` highest-fitness individuals, descending, ties broken by earlier
/// population position. Returns the whole population when k ≥ |pop|.
pub fn elite(pop: &[Individual], k: usize) -> Vec<Individual> {
    assert!(k >= 1, "elite count must be at least 1");
    let mut order: Vec<usize> = (0..pop.len()).collect();
    // Stable sort: equal fitness keeps ascending position order.
    order.sort_by(|&a, &b| {
        pop[b].fitness.partial_cmp(&pop[a].fitness).expect("fitness is never NaN")
    });
    order.into_iter().take(k).map(|i| pop[i].clone()).collect()
}

/// Sample `t` distinct individuals uniformly (t capped at |pop|) and return
/// the best two by fitness, ties broken by earlier position.
pub fn tournament_select<'a, R: Rng>(
    pop: &'a [Individual],
    t: usize,
    rng: &mut R,
) -> (&'a Individual, &'a Individual) {
    assert!(pop.len() >= 2, "a tournament needs at least two individuals");
    assert!(t >= 2, "tournament size must be at least 2");
    let t = t.min(pop.len());
    let mut sampled: Vec<usize> = rand::seq::index::sample(rng, pop.len(), t).into_vec();
    sampled.sort_unstable();
    sampled.sort_by(|&a, &b| {
        pop[b].fitness.partial_cmp(&pop[a].fitness).expect("fitness is never NaN")
    });
    (&pop[sampled[0]], &pop[sampled[1]])
}

fn splice(p1: &Script, p2: &Script, i: usize, j: usize) -> Vec<Rule> {
    let mut rules = p1.rules[..i].to_vec();
    rules.extend_from_slice(&p2.rules[j..]);
    rules
}

fn fallback_rule(p1: &Script, p2: &Script, rng: &mut impl Rng) -> Rule {
    let parent = if rng.gen_bool(0.5) { p1 } else { p2 };
    parent.rules[rng.gen_range(0..parent.rules.len())].clone()
}

/// Recombine two parents: keep `p1`'s rules before a uniform split point
/// and `p2`'s rules after another, in order. An empty concatenation falls
/// back to one rule copied from a uniformly chosen parent; an oversized one
/// is truncated from the tail to the grammar's rule cap.
pub fn crossover(p1: &Script, p2: &Script, rng: &mut impl Rng, grammar: &GrammarConfig) -> Script {
    let i = rng.gen_range(0..=p1.rules.len());
    let j = rng.gen_range(0..=p2.rules.len());
    let mut rules = splice(p1, p2, i, j);
    if rules.is_empty() {
        rules.push(fallback_rule(p1, p2, rng));
    }
    rules.truncate(grammar.max_rules.max(1));
    Script::new(rules)
}

/// Apply exactly one edit, chosen uniformly from replace / insert / delete
/// / no-op. Guarded operators (insert at the rule cap, delete on a single
/// rule) degrade to no-ops, so the result is always a valid script.
pub fn mutate(s: &Script, rng: &mut impl Rng, grammar: &GrammarConfig) -> Script {
    let mut rules = s.rules.clone();
    match rng.gen_range(0..4u8) {
        0 => {
            let at = rng.gen_range(0..rules.len());
            rules[at] = random_rule(rng, grammar);
        }
        1 => {
            if rules.len() < grammar.max_rules {
                let at = rng.gen_range(0..=rules.len());
                rules.insert(at, random_rule(rng, grammar));
            }
        }
        2 => {
            if rules.len() > 1 {
                let at = rng.gen_range(0..rules.len());
                rules.remove(at);
            }
        }
        _ => {}
    }
    Script::new(rules)
}

/// Drop every rule that never fired, preserving order; a script whose rules
/// all went unused keeps its first rule rather than becoming empty. The
/// lineage id survives pruning.
pub fn remove_unused(s: &Script, usage: &UsageCounters) -> Script {
    assert_eq!(usage.len(), s.rules.len(), "usage counters misaligned with script");
    let rules: Vec<Rule> = s
        .rules
        .iter()
        .zip(usage.counts())
        .filter(|(_, &count)| count > 0)
        .map(|(rule, _)| rule.clone())
        .collect();
    let rules = if rules.is_empty() { vec![s.rules[0].clone()] } else { rules };
    Script { id: s.id, rules }
}

/// Prune an individual: drop unused rules and the matching counter slots,
/// keeping usage aligned with the script.
fn prune_individual(ind: &Individual) -> Individual {
    let script = remove_unused(&ind.script, &ind.usage);
    let kept: Vec<u64> = ind.usage.counts().iter().copied().filter(|&c| c > 0).collect();
    let usage = if kept.is_empty() { UsageCounters::new(1) } else { UsageCounters::from_counts(kept) };
    Individual { script, fitness: ind.fitness, usage, games: ind.games }
}

// ===== the generational loop ============================================

/// Summary of one generation, taken after pruning.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Canonical text of the generation's best script.
    pub best_script: String,
}

/// Everything a run produces: per-generation summaries, the final best
/// individual, and the evaluated (pre-pruning) population of every
/// generation for audits and replays.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionReport {
    pub records: Vec<GenerationRecord>,
    pub best: Individual,
    pub trace: Vec<Vec<Individual>>,
}

/// Run the full loop: random initial population, then per generation —
/// evaluate, prune each individual against its own usage, record, and
/// breed the next population from the elites plus mutated crossover
/// children of tournament winners. Deterministic in `cfg.seed`.
pub fn ezs(cfg: &GAConfig) -> Result<EvolutionReport, ConfigError> {
    cfg.validate()?;
    let mut next_id: u64 = 0;
    let mut fresh_id = move || {
        next_id += 1;
        next_id
    };

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_INIT]));
    let mut pop: Vec<Individual> = (0..cfg.population_size)
        .map(|_| {
            let mut script = random_script(&mut init_rng, &cfg.grammar);
            script.id = fresh_id();
            Individual::new(script)
        })
        .collect();

    let mut records = Vec::with_capacity(cfg.generations);
    let mut trace = Vec::with_capacity(cfg.generations);
    let mut best = None;

    for generation in 0..cfg.generations {
        eval_population(&mut pop, cfg, generation);
        trace.push(pop.clone());

        for ind in pop.iter_mut() {
            *ind = prune_individual(ind);
        }

        let leader = elite(&pop, 1).remove(0);
        let mean_fitness =
            pop.iter().map(|ind| ind.fitness).sum::<f64>() / pop.len() as f64;
        records.push(GenerationRecord {
            generation,
            best_fitness: leader.fitness,
            mean_fitness,
            best_script: serialize_script(&leader.script),
        });

        if generation + 1 == cfg.generations {
            best = Some(leader);
            break;
        }

        let mut breed_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_BREED, generation as u64]));
        let mut next = elite(&pop, cfg.elites);
        while next.len() < cfg.population_size {
            let (a, b) = tournament_select(&pop, cfg.tournament_size, &mut breed_rng);
            let mut child = mutate(
                &crossover(&a.script, &b.script, &mut breed_rng, &cfg.grammar),
                &mut breed_rng,
                &cfg.grammar,
            );
            child.id = fresh_id();
            next.push(Individual::new(child));
        }
        pop = next;
    }

    Ok(EvolutionReport {
        records,
        best: best.expect("at least one generation ran"),
        trace,
    })
}

// ===== tests ============================================================
