//! From rules to actions: candidate enumeration and the three policies.
//!
//! - [`enumerate_contexts`] lists the mover's candidates in the engine's
//!   canonical action order, pairing each with the hand it would produce
//! - [`ScriptPolicy`] walks its rules outermost over those candidates and
//!   plays the first pair that fires, ticking that rule's usage counter
//! - [`BaselinePolicy`] is the hand-written yardstick: slot `i` wants a
//!   card from `[8i, 8i + 7]`, lower slots first, discard before deck
//! - [`RandomPolicy`] picks uniformly among the legal actions
//!
//! Policies are per-game values: a fresh playout gets fresh counters and a
//! fresh random stream, which is what keeps batched evaluation independent
//! of scheduling order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::{self, ParseError, Script};
use crate::game::{Action, Card, EngineConfig, GameState, Player, Rack};

/// One candidate action plus what it would do to the mover's rack. For
/// `Pass` the resulting hand equals the current hand and nothing is placed;
/// for swaps, `resulting_hand[placed_slot] == placed_value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionContext {
    pub action: Action,
    pub current_hand: Rack,
    pub resulting_hand: Rack,
    pub placed_value: Option<Card>,
    pub placed_slot: Option<usize>,
}

/// Build one context per legal action, in the engine's canonical order.
/// The deck top is revealed here — deciding policies see it by design.
pub fn enumerate_contexts(state: &GameState) -> Vec<ActionContext> {
    let current = state.rack(state.to_move());
    let actions = state.legal_actions();
    let mut contexts = Vec::with_capacity(actions.len());
    for action in actions {
        let ctx = match action {
            Action::TakeDiscard(slot) => swap_context(current, action, slot, state.discard_top()),
            Action::TakeDeck(slot) => {
                let top = state.deck_top().expect("legal TakeDeck implies a revealable card");
                swap_context(current, action, slot, top)
            }
            Action::Pass => ActionContext {
                action,
                current_hand: current.clone(),
                resulting_hand: current.clone(),
                placed_value: None,
                placed_slot: None,
            },
        };
        contexts.push(ctx);
    }
    contexts
}

fn swap_context(current: &Rack, action: Action, slot: usize, card: Card) -> ActionContext {
    ActionContext {
        action,
        current_hand: current.clone(),
        resulting_hand: current.with_replaced(slot, card),
        placed_value: Some(card),
        placed_slot: Some(slot),
    }
}

/// Per-rule fire counts, aligned positionally with a script's rule list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UsageCounters {
    counts: Vec<u64>,
}

impl UsageCounters {
    pub fn new(rule_count: usize) -> Self {
        UsageCounters { counts: vec![0; rule_count] }
    }

    /// Rebuild counters from raw counts (e.g. when pruning a script drops
    /// the zero-count entries alongside their rules).
    pub fn from_counts(counts: Vec<u64>) -> Self {
        UsageCounters { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, rule: usize) -> u64 {
        self.counts[rule]
    }

    pub fn record(&mut self, rule: usize) {
        self.counts[rule] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fold another playout's counts into this one. Panics on misaligned
    /// lengths — merging counters from different scripts is a bug.
    pub fn merge(&mut self, other: &UsageCounters) {
        assert_eq!(self.counts.len(), other.counts.len(), "misaligned usage counters");
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            *mine += theirs;
        }
    }
}

/// Decide by script: rules outermost, candidates innermost, first firing
/// (rule, candidate) pair wins and that rule's counter ticks. When nothing
/// fires the policy passes — or takes the first legal action in the corner
/// where no hidden card is left to pass with.
pub fn script_decide(script: &Script, state: &GameState, counters: &mut UsageCounters) -> Action {
    assert_eq!(counters.len(), script.rules.len(), "counters must align with the script");
    let contexts = enumerate_contexts(state);
    for (rule_idx, rule) in script.rules.iter().enumerate() {
        for ctx in &contexts {
            if dsl::rule_fires(rule, ctx) {
                counters.record(rule_idx);
                return ctx.action;
            }
        }
    }
    match contexts.last() {
        Some(ctx) if ctx.action == Action::Pass => Action::Pass,
        _ => contexts[0].action,
    }
}

/// The value interval slot `slot` wants under the baseline: the deck splits
/// evenly across slots (8 cards each by default); any remainder goes to the
/// last slot.
fn slot_interval(slot: usize, config: &EngineConfig) -> (u8, u8) {
    let width = (config.card_count as usize / config.rack_size).max(1);
    let lo = (slot * width).min(config.card_count as usize - 1) as u8;
    let hi = if slot + 1 == config.rack_size {
        config.card_count - 1
    } else {
        ((slot + 1) * width - 1).min(config.card_count as usize - 1) as u8
    };
    (lo, hi)
}

/// The hand-written yardstick. Scan slots low to high; for each slot whose
/// occupant lies outside its own interval, take the discard top if it fits
/// the interval, else the deck top if it fits. With nothing to fix (or
/// nothing that fits), pass.
pub fn baseline_decide(state: &GameState) -> Action {
    let rack = state.rack(state.to_move());
    let discard = state.discard_top();
    let deck = state.deck_top();
    for slot in 0..rack.len() {
        let (lo, hi) = slot_interval(slot, state.config());
        let fits = |card: Card| card.0 >= lo && card.0 <= hi;
        if fits(rack.get(slot)) {
            continue;
        }
        if fits(discard) {
            return Action::TakeDiscard(slot);
        }
        if deck.map_or(false, fits) {
            return Action::TakeDeck(slot);
        }
    }
    if deck.is_some() {
        Action::Pass
    } else {
        // No hidden card to pass with (non-default geometry only).
        Action::TakeDiscard(0)
    }
}

/// Pick uniformly among the legal actions.
pub fn random_decide(state: &GameState, rng: &mut impl Rng) -> Action {
    let actions = state.legal_actions();
    actions[rng.gen_range(0..actions.len())]
}

/// Script-driven policy: a script plus its usage counters.
#[derive(Clone, Debug)]
pub struct ScriptPolicy {
    script: Script,
    counters: UsageCounters,
}

impl ScriptPolicy {
    pub fn new(script: Script) -> Self {
        let counters = UsageCounters::new(script.rules.len());
        ScriptPolicy { script, counters }
    }

    pub fn script(&self) -> &Script {
        &self.script
    }

    pub fn counters(&self) -> &UsageCounters {
        &self.counters
    }

    pub fn into_counters(self) -> UsageCounters {
        self.counters
    }
}

impl Player for ScriptPolicy {
    fn choose(&mut self, state: &GameState) -> Action {
        script_decide(&self.script, state, &mut self.counters)
    }
}

/// The interval baseline; stateless.
#[derive(Clone, Copy, Debug, Default)]
pub struct BaselinePolicy;

impl Player for BaselinePolicy {
    fn choose(&mut self, state: &GameState) -> Action {
        baseline_decide(state)
    }
}

/// Uniform-random play over a seeded stream.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn seeded(seed: u64) -> Self {
        RandomPolicy { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Player for RandomPolicy {
    fn choose(&mut self, state: &GameState) -> Action {
        random_decide(state, &mut self.rng)
    }
}

/// Any of the three policies as one dispatchable value.
#[derive(Clone, Debug)]
pub enum Policy {
    Script(ScriptPolicy),
    Baseline(BaselinePolicy),
    Random(RandomPolicy),
}

impl Policy {
    /// Usage counters, when this is a script policy.
    pub fn usage(&self) -> Option<&UsageCounters> {
        match self {
            Policy::Script(p) => Some(p.counters()),
            _ => None,
        }
    }
}

impl Player for Policy {
    fn choose(&mut self, state: &GameState) -> Action {
        match self {
            Policy::Script(p) => p.choose(state),
            Policy::Baseline(p) => p.choose(state),
            Policy::Random(p) => p.choose(state),
        }
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown policy `{0}` (expected `script:<path>`, `baseline` or `random`)")]
    UnknownSpecifier(String),
    #[error("cannot read script `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse script `{path}`: {source}")]
    Parse { path: String, source: ParseError },
}

/// How a seat is filled, before any per-game state exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySpec {
    Script(Script),
    Baseline,
    Random,
}

impl PolicySpec {
    /// Parse a CLI specifier — `script:<path>`, `baseline` or `random` —
    /// loading and parsing script files eagerly.
    pub fn from_cli(spec: &str) -> Result<PolicySpec, SpecError> {
        if let Some(path) = spec.strip_prefix("script:") {
            let text = std::fs::read_to_string(path)
                .map_err(|source| SpecError::Io { path: path.to_string(), source })?;
            let script = dsl::parse_script(&text)
                .map_err(|source| SpecError::Parse { path: path.to_string(), source })?;
            return Ok(PolicySpec::Script(script));
        }
        match spec {
            "baseline" => Ok(PolicySpec::Baseline),
            "random" => Ok(PolicySpec::Random),
            other => Err(SpecError::UnknownSpecifier(other.to_string())),
        }
    }

    /// Spawn the per-game policy. Scripts start with zeroed counters, the
    /// random policy draws from a stream derived from `seed`, and the seed
    /// is irrelevant to the other two.
    pub fn instantiate(&self, seed: u64) -> Policy {
        match self {
            PolicySpec::Script(script) => Policy::Script(ScriptPolicy::new(script.clone())),
            PolicySpec::Baseline => Policy::Baseline(BaselinePolicy),
            PolicySpec::Random => Policy::Random(RandomPolicy::seeded(seed)),
        }
    }
}
