//! Simplified Rack'O: game engine, decision-rule DSL, scripted agents and
//! an evolutionary search that breeds playing scripts.
//!
//! Layout:
//! - [`game`] — cards, racks, the turn state machine and full playouts
//! - [`dsl`] — the five-predicate rule language: AST, evaluation, text
//!   format and random generation
//! - [`agent`] — turning rules into play: action contexts, the scripted
//!   policy, a hand-written interval baseline and a uniform-random policy
//! - [`evolve`] — round-robin evaluation and the generational loop that
//!   breeds scripts (elitism, tournament selection, crossover, mutation,
//!   dead-rule pruning)
//!
//! Everything is deterministic under a caller-supplied seed, including
//! parallel evaluation: games are seeded independently and reduced in a
//! fixed order, so thread count never changes a result.

pub mod agent;
pub mod dsl;
pub mod evolve;
pub mod game;

pub use agent::{
    baseline_decide, enumerate_contexts, random_decide, script_decide, ActionContext,
    BaselinePolicy, Policy, PolicySpec, RandomPolicy, ScriptPolicy, SpecError, UsageCounters,
};
pub use dsl::{
    parse_script, serialize_script, GrammarConfig, ParseError, Predicate, Rule, Script,
};
pub use evolve::{
    crossover, derive_seed, elite, eval_population, evaluation, ezs, mutate, remove_unused,
    schedule, tournament_select, ConfigError, EvolutionReport, GAConfig, GameRecord, GameTask,
    GenerationRecord, Individual, MatchStats,
};
pub use game::{
    Action, Card, EngineConfig, GameError, GameResult, GameState, Outcome, Player, PlayerId, Rack,
};
pub use game::{play_from, play_game, play_game_traced};
