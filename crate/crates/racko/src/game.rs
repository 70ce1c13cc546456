//! Simplified two-player Rack'O.
//!
//! Plain data plus a small set of transitions:
//! - 40 cards valued 0..=39, exactly one of each
//! - each player holds a 5-slot rack; slots keep their position for the
//!   whole game
//! - a turn is exactly one action: swap the discard top into a slot, swap
//!   the revealed deck top into a slot (the replaced card goes onto the
//!   discard pile), or pass, which flips the deck top onto the discard pile
//! - the first rack that reads strictly ascending from slot 0 to slot 4
//!   wins; hitting the turn cap with no winner is a draw
//!
//! The deck is rebuilt from the discard pile (keeping the visible top card)
//! the moment it runs dry, so whenever a hidden draw is legal there is a
//! real card to reveal. All randomness — the initial shuffle and every
//! reshuffle — flows from the seed handed to [`GameState::new`], which makes
//! whole games replayable.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Seat index; player 0 always moves first.
pub type PlayerId = usize;

/// A single card. Values run 0..card_count and are unique within a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card(pub u8);

/// One player's rack: a fixed row of face-up slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rack {
    slots: Vec<Card>,
}

impl Rack {
    pub fn new(slots: Vec<Card>) -> Self {
        Rack { slots }
    }

    pub fn slots(&self) -> &[Card] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, slot: usize) -> Card {
        self.slots[slot]
    }

    /// Put `card` into `slot`, returning the card that was there.
    pub fn replace(&mut self, slot: usize, card: Card) -> Card {
        std::mem::replace(&mut self.slots[slot], card)
    }

    /// The rack as it would look with `card` in `slot`; `self` is untouched.
    pub fn with_replaced(&self, slot: usize, card: Card) -> Rack {
        let mut next = self.clone();
        next.replace(slot, card);
        next
    }

    /// Rack'O test: slot values strictly increase from slot 0 upward.
    pub fn is_racko(&self) -> bool {
        self.slots.windows(2).all(|w| w[0] < w[1])
    }
}

/// Structural constants with knobs. Only the defaults (40 cards, 5 slots,
/// 2 players) are exercised by the test suite; anything else merely has to
/// leave at least one card for the opening discard flip.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    /// Number of distinct cards, valued 0..card_count.
    pub card_count: u8,
    /// Slots per rack.
    pub rack_size: usize,
    /// Seats at the table. The engine is two-seat; this knob exists so the
    /// configuration is explicit, and anything other than 2 is rejected.
    pub players: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            card_count: 40,
            rack_size: 5,
            players: 2,
        }
    }
}

impl EngineConfig {
    fn validate(&self) -> Result<(), GameError> {
        if self.players != 2 {
            return Err(GameError::InvalidConfig(format!(
                "engine supports exactly 2 players, got {}",
                self.players
            )));
        }
        if self.rack_size == 0 {
            return Err(GameError::InvalidConfig("rack_size must be at least 1".into()));
        }
        let needed = self.players * self.rack_size + 1;
        if (self.card_count as usize) < needed {
            return Err(GameError::InvalidConfig(format!(
                "card_count {} cannot cover {} dealt cards plus the discard flip",
                self.card_count, needed
            )));
        }
        Ok(())
    }
}

/// One turn's worth of play. Slot indices run 0..rack_size.
///
/// Picking up the discard top and putting it straight back is a no-op, so
/// it is not a distinct action; `Pass` covers declining to swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Swap the visible discard top into the given slot.
    TakeDiscard(usize),
    /// Reveal the deck top and swap it into the given slot.
    TakeDeck(usize),
    /// Flip the deck top onto the discard pile and end the turn.
    Pass,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("action {0:?} is not legal in this state")]
    IllegalAction(Action),
    #[error("the game is already over")]
    Terminal,
    #[error("player {player} chose illegal action {action:?}")]
    PolicyFault { player: PlayerId, action: Action },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
}

/// How a finished game ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Win(PlayerId),
    Draw,
}

/// Result of a full playout. `turns_played` counts applied actions; it
/// equals the turn cap exactly when the outcome is a draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameResult {
    pub outcome: Outcome,
    pub turns_played: u32,
}

/// Full game state between turns.
///
/// Invariants, established by [`GameState::new`] and preserved by
/// [`GameState::apply`]:
/// - every card value appears exactly once across deck, discard and racks
/// - the discard pile is never empty
/// - an empty deck implies the discard holds a single card (recycling is
///   eager, see [`GameState::recycle_deck`]), so a legal hidden draw always
///   has a card to reveal
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    config: EngineConfig,
    /// Draw pile; the last element is the next card drawn.
    deck: Vec<Card>,
    /// Discard pile; the last element is the visible top.
    discard: Vec<Card>,
    racks: [Rack; 2],
    to_move: PlayerId,
    turn: u32,
    winner: Option<PlayerId>,
    /// Stream for reshuffles; seeded once per game.
    rng: ChaCha8Rng,
}

impl GameState {
    /// Deal a fresh game: shuffle 0..card_count with the seeded stream, deal
    /// rack_size cards alternately to each player (player 0 first), then
    /// flip one card to start the discard pile.
    ///
    /// Panics if `config` is structurally invalid; every seed is fine.
    pub fn new(seed: u64, config: &EngineConfig) -> GameState {
        config.validate().expect("invalid engine config");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut deck: Vec<Card> = (0..config.card_count).map(Card).collect();
        deck.shuffle(&mut rng);

        let mut racks = [Rack::new(Vec::new()), Rack::new(Vec::new())];
        for _ in 0..config.rack_size {
            for rack in racks.iter_mut() {
                rack.slots.push(deck.pop().expect("deal exceeds deck"));
            }
        }
        let first_discard = deck.pop().expect("no card left for the discard flip");

        GameState {
            config: *config,
            deck,
            discard: vec![first_discard],
            racks,
            to_move: 0,
            turn: 0,
            winner: None,
            rng,
        }
    }

    /// Assemble a state from explicit piles, mainly for tests and debugging.
    ///
    /// Validates rack sizes, a non-empty discard and card conservation, then
    /// normalizes: if the deck is empty but the discard is recyclable, the
    /// recycle happens immediately (seeded by `reshuffle_seed`).
    pub fn from_parts(
        config: &EngineConfig,
        deck: Vec<Card>,
        discard: Vec<Card>,
        racks: [Rack; 2],
        to_move: PlayerId,
        turn: u32,
        reshuffle_seed: u64,
    ) -> Result<GameState, GameError> {
        config.validate()?;
        if to_move > 1 {
            return Err(GameError::InvalidState(format!("to_move must be 0 or 1, got {to_move}")));
        }
        for (player, rack) in racks.iter().enumerate() {
            if rack.len() != config.rack_size {
                return Err(GameError::InvalidState(format!(
                    "player {player} rack has {} slots, expected {}",
                    rack.len(),
                    config.rack_size
                )));
            }
        }
        if discard.is_empty() {
            return Err(GameError::InvalidState("discard pile must not be empty".into()));
        }
        let mut seen = vec![false; config.card_count as usize];
        let all = deck
            .iter()
            .chain(discard.iter())
            .chain(racks[0].slots())
            .chain(racks[1].slots());
        for card in all {
            let v = card.0 as usize;
            if v >= seen.len() {
                return Err(GameError::InvalidState(format!("card {} out of range", card.0)));
            }
            if seen[v] {
                return Err(GameError::InvalidState(format!("card {} appears twice", card.0)));
            }
            seen[v] = true;
        }
        if let Some(missing) = seen.iter().position(|present| !present) {
            return Err(GameError::InvalidState(format!("card {missing} is missing")));
        }

        let mut state = GameState {
            config: *config,
            deck,
            discard,
            racks,
            to_move,
            turn,
            winner: None,
            rng: ChaCha8Rng::seed_from_u64(reshuffle_seed),
        };
        state.recycle_deck();
        Ok(state)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn deck(&self) -> &[Card] {
        &self.deck
    }

    pub fn discard(&self) -> &[Card] {
        &self.discard
    }

    /// Next hidden card, revealed to the deciding policy while it weighs
    /// `TakeDeck`. `None` only when no hidden draw is legal.
    pub fn deck_top(&self) -> Option<Card> {
        self.deck.last().copied()
    }

    /// Visible top of the discard pile; the pile is never empty.
    pub fn discard_top(&self) -> Card {
        *self.discard.last().expect("discard pile is never empty")
    }

    pub fn rack(&self, player: PlayerId) -> &Rack {
        &self.racks[player]
    }

    pub fn to_move(&self) -> PlayerId {
        self.to_move
    }

    /// Applied-action count so far.
    pub fn turn(&self) -> u32 {
        self.turn
    }

    /// Player who achieved Rack'O through play, if any. A rack that was
    /// dealt ascending does not win by itself; its holder still has to make
    /// a (racko-preserving) move.
    pub fn winner(&self) -> Option<PlayerId> {
        self.winner
    }

    pub fn is_terminal(&self) -> bool {
        self.winner.is_some()
    }

    /// Every action the mover may take, in canonical order:
    /// `TakeDiscard(0..rack_size)`, then `TakeDeck(0..rack_size)`, then
    /// `Pass`. The hidden-draw actions appear only while a card can be
    /// produced; policies tie-break by this order, so it is part of the
    /// engine contract.
    ///
    /// Panics when called on a terminal state.
    pub fn legal_actions(&self) -> Vec<Action> {
        assert!(self.winner.is_none(), "legal_actions on a terminal state");
        let r = self.config.rack_size;
        let mut actions = Vec::with_capacity(2 * r + 1);
        actions.extend((0..r).map(Action::TakeDiscard));
        if !self.deck.is_empty() {
            actions.extend((0..r).map(Action::TakeDeck));
            actions.push(Action::Pass);
        }
        actions
    }

    /// Apply one action for the player to move, then check that player's
    /// rack for Rack'O, hand the turn over and recycle the deck if the draw
    /// emptied it.
    pub fn apply(&mut self, action: Action) -> Result<(), GameError> {
        if self.winner.is_some() {
            return Err(GameError::Terminal);
        }
        let legal = match action {
            Action::TakeDiscard(slot) => slot < self.config.rack_size,
            Action::TakeDeck(slot) => slot < self.config.rack_size && !self.deck.is_empty(),
            Action::Pass => !self.deck.is_empty(),
        };
        if !legal {
            return Err(GameError::IllegalAction(action));
        }

        let mover = self.to_move;
        match action {
            Action::TakeDiscard(slot) => {
                let top = self.discard.pop().expect("discard pile is never empty");
                let replaced = self.racks[mover].replace(slot, top);
                self.discard.push(replaced);
            }
            Action::TakeDeck(slot) => {
                let top = self.deck.pop().expect("checked non-empty");
                let replaced = self.racks[mover].replace(slot, top);
                self.discard.push(replaced);
            }
            Action::Pass => {
                let top = self.deck.pop().expect("checked non-empty");
                self.discard.push(top);
            }
        }

        if self.racks[mover].is_racko() {
            self.winner = Some(mover);
        }
        self.to_move = 1 - mover;
        self.turn += 1;
        self.recycle_deck();
        Ok(())
    }

    /// Rebuild the deck from the discard pile, leaving the visible top card
    /// in place and shuffling the rest with the state's reshuffle stream.
    /// No-op while the deck still has cards or the discard is a single card.
    pub fn recycle_deck(&mut self) {
        if !self.deck.is_empty() || self.discard.len() < 2 {
            return;
        }
        let top = self.discard.pop().expect("checked len >= 2");
        self.deck.append(&mut self.discard);
        self.discard.push(top);
        self.deck.shuffle(&mut self.rng);
    }
}

/// A decision procedure for one seat. Closures over `&GameState` work
/// directly; realistic policies live in the `agent` module.
pub trait Player {
    fn choose(&mut self, state: &GameState) -> Action;
}

impl<F: FnMut(&GameState) -> Action> Player for F {
    fn choose(&mut self, state: &GameState) -> Action {
        self(state)
    }
}

/// Play one full game from a fresh deal under the default engine config.
/// `turn_cap` is the most actions allowed before the game is scored a draw.
///
/// A policy returning an illegal action aborts the game with
/// [`GameError::PolicyFault`] naming the offending seat.
pub fn play_game<A: Player, B: Player>(
    p0: &mut A,
    p1: &mut B,
    seed: u64,
    turn_cap: u32,
) -> Result<GameResult, GameError> {
    play_from(GameState::new(seed, &EngineConfig::default()), p0, p1, turn_cap)
}

/// As [`play_game`], but also returns the action sequence. Players strictly
/// alternate, so the mover of `transcript[i]` is `i % 2`.
pub fn play_game_traced<A: Player, B: Player>(
    p0: &mut A,
    p1: &mut B,
    seed: u64,
    turn_cap: u32,
) -> Result<(GameResult, Vec<Action>), GameError> {
    let mut transcript = Vec::new();
    let state = GameState::new(seed, &EngineConfig::default());
    let result = run_loop(state, p0, p1, turn_cap, Some(&mut transcript))?;
    Ok((result, transcript))
}

/// Play out an existing state until Rack'O or the turn cap. The cap bounds
/// the state's turn counter, so a fresh state plays at most `turn_cap`
/// actions.
pub fn play_from<A: Player, B: Player>(
    state: GameState,
    p0: &mut A,
    p1: &mut B,
    turn_cap: u32,
) -> Result<GameResult, GameError> {
    run_loop(state, p0, p1, turn_cap, None)
}

fn run_loop<A: Player, B: Player>(
    mut state: GameState,
    p0: &mut A,
    p1: &mut B,
    turn_cap: u32,
    mut transcript: Option<&mut Vec<Action>>,
) -> Result<GameResult, GameError> {
    assert!(turn_cap >= 1, "turn_cap must be at least 1");
    while state.turn() < turn_cap {
        if let Some(w) = state.winner() {
            return Ok(GameResult { outcome: Outcome::Win(w), turns_played: state.turn() });
        }
        let mover = state.to_move();
        let action = if mover == 0 { p0.choose(&state) } else { p1.choose(&state) };
        match state.apply(action) {
            Ok(()) => {}
            Err(GameError::IllegalAction(_)) | Err(GameError::Terminal) => {
                return Err(GameError::PolicyFault { player: mover, action });
            }
            Err(other) => return Err(other),
        }
        if let Some(t) = transcript.as_deref_mut() {
            t.push(action);
        }
    }
    match state.winner() {
        Some(w) => Ok(GameResult { outcome: Outcome::Win(w), turns_played: state.turn() }),
        None => Ok(GameResult { outcome: Outcome::Draw, turns_played: state.turn() }),
    }
}
