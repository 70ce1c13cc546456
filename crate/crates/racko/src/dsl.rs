//! The five-predicate rule language scripts are written in.
//!
//! A script is an ordered list of rules; a rule is a non-empty conjunction
//! of predicates. Predicates are evaluated against an [`ActionContext`] — a
//! candidate action plus the hand it would produce — so "the card" below
//! always means the card the candidate action would place:
//!
//! - `isBigger(i)` / `isSmaller(i)` — the action swaps into slot `i` and
//!   the placed card is bigger/smaller than the card in slot `i + 1`
//! - `givesRacko` — the hand after the swap reads strictly ascending
//! - `hasRacko` — the hand *before* the action reads strictly ascending;
//!   this is the only predicate that can hold for a `Pass` candidate
//! - `isCardBetweenNumbers(lo, hi, i)` — the action swaps into slot `i` and
//!   the placed card lies in `[min(lo,hi), max(lo,hi)]`, ends inclusive.
//!   Bounds are stored exactly as written; the normalization happens here
//!   at evaluation time, so inverted bounds survive a round-trip.
//!
//! The text format is line-oriented: one rule per line, conjuncts joined by
//! `and`, `#` lines are comments. Parsing is lenient — an optional `DSL.`
//! prefix, free spacing, optional commas and an optional trailing hand
//! argument (`rack` or `Game.getRack()`) are all tolerated — while
//! [`serialize_script`] always emits the canonical short form.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::ActionContext;

/// Highest slot index a predicate may address (DSL slots run 0..=4,
/// matching the default rack).
pub const MAX_SLOT_INDEX: usize = 4;
/// Highest card number a predicate may mention (cards run 0..=39 by
/// default).
pub const MAX_CARD_NUMBER: u8 = 39;

// ===== AST =====

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    IsBigger { index: usize },
    IsSmaller { index: usize },
    GivesRacko,
    HasRacko,
    IsCardBetweenNumbers { lo: u8, hi: u8, index: usize },
}

/// A conjunction of predicates; fires only when every conjunct holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub conjuncts: Vec<Predicate>,
}

/// An ordered rule list. Earlier rules have priority.
///
/// `id` is an opaque lineage tag (the evolutionary loop numbers the scripts
/// it creates); it is not part of the text format and two scripts compare
/// equal whenever their rule lists do.
#[derive(Clone, Debug, Default)]
pub struct Script {
    pub id: u64,
    pub rules: Vec<Rule>,
}

impl PartialEq for Script {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for Script {}

impl Script {
    pub fn new(rules: Vec<Rule>) -> Self {
        Script { id: 0, rules }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_script(self))
    }
}

impl FromStr for Script {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_script(s)
    }
}

// ===== evaluation =====

/// Evaluate one predicate against one candidate action.
pub fn eval_predicate(predicate: &Predicate, ctx: &ActionContext) -> bool {
    match *predicate {
        Predicate::HasRacko => ctx.current_hand.is_racko(),
        Predicate::GivesRacko => ctx.placed_slot.is_some() && ctx.resulting_hand.is_racko(),
        Predicate::IsBigger { index } => {
            ctx.placed_slot == Some(index)
                && index + 1 < ctx.resulting_hand.len()
                && ctx.resulting_hand.get(index) > ctx.resulting_hand.get(index + 1)
        }
        Predicate::IsSmaller { index } => {
            ctx.placed_slot == Some(index)
                && index + 1 < ctx.resulting_hand.len()
                && ctx.resulting_hand.get(index) < ctx.resulting_hand.get(index + 1)
        }
        Predicate::IsCardBetweenNumbers { lo, hi, index } => {
            ctx.placed_slot == Some(index) && {
                let placed = ctx.placed_value.expect("swap context has a placed card").0;
                placed >= lo.min(hi) && placed <= lo.max(hi)
            }
        }
    }
}

/// A rule fires when all of its conjuncts hold.
pub fn rule_fires(rule: &Rule, ctx: &ActionContext) -> bool {
    rule.conjuncts.iter().all(|p| eval_predicate(p, ctx))
}

// ===== random generation =====

/// Bounds for generating and varying scripts. These cap what the sampler,
/// crossover and mutation produce; the parser deliberately does not apply
/// the upper caps, so hand-written or previously evolved scripts of any
/// length remain loadable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrammarConfig {
    /// Most rules a generated or mutated script may hold.
    pub max_rules: usize,
    /// Most conjuncts a generated rule may hold.
    pub max_conjuncts: usize,
    /// Inclusive rule-count range for freshly sampled scripts.
    pub initial_rule_count_range: (usize, usize),
    /// Chance a sampled rule has exactly one conjunct; otherwise the count
    /// is uniform in 2..=max_conjuncts.
    pub single_conjunct_probability: f64,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig {
            max_rules: 20,
            max_conjuncts: 3,
            initial_rule_count_range: (1, 8),
            single_conjunct_probability: 0.5,
        }
    }
}

impl GrammarConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_rules < 1 {
            return Err("max_rules must be at least 1".into());
        }
        if self.max_conjuncts < 1 {
            return Err("max_conjuncts must be at least 1".into());
        }
        let (lo, hi) = self.initial_rule_count_range;
        if lo < 1 || lo > hi || hi > self.max_rules {
            return Err(format!(
                "initial_rule_count_range [{lo}, {hi}] must satisfy 1 <= lo <= hi <= max_rules ({})",
                self.max_rules
            ));
        }
        if !(0.0..=1.0).contains(&self.single_conjunct_probability) {
            return Err(format!(
                "single_conjunct_probability {} must lie in [0, 1]",
                self.single_conjunct_probability
            ));
        }
        Ok(())
    }
}

fn random_predicate(rng: &mut impl Rng) -> Predicate {
    match rng.gen_range(0..5u32) {
        0 => Predicate::IsBigger { index: rng.gen_range(0..=MAX_SLOT_INDEX) },
        1 => Predicate::IsSmaller { index: rng.gen_range(0..=MAX_SLOT_INDEX) },
        2 => Predicate::GivesRacko,
        3 => Predicate::HasRacko,
        _ => Predicate::IsCardBetweenNumbers {
            lo: rng.gen_range(0..=MAX_CARD_NUMBER),
            hi: rng.gen_range(0..=MAX_CARD_NUMBER),
            index: rng.gen_range(0..=MAX_SLOT_INDEX),
        },
    }
}

/// Sample one rule: predicate kinds uniform, indices uniform in 0..=4,
/// numbers uniform in 0..=39.
pub fn random_rule(rng: &mut impl Rng, cfg: &GrammarConfig) -> Rule {
    debug_assert!(cfg.validate().is_ok());
    let count = if cfg.max_conjuncts <= 1 || rng.gen_bool(cfg.single_conjunct_probability) {
        1
    } else {
        rng.gen_range(2..=cfg.max_conjuncts)
    };
    Rule { conjuncts: (0..count).map(|_| random_predicate(rng)).collect() }
}

/// Sample a fresh script with a uniform rule count drawn from
/// `initial_rule_count_range`.
pub fn random_script(rng: &mut impl Rng, cfg: &GrammarConfig) -> Script {
    debug_assert!(cfg.validate().is_ok());
    let (lo, hi) = cfg.initial_rule_count_range;
    let count = rng.gen_range(lo..=hi);
    Script::new((0..count).map(|_| random_rule(rng, cfg)).collect())
}

// ===== text format =====

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{0}` got unexpected arguments")]
    BadArguments(String),
    #[error("slot index {value} is out of range (0..={max})")]
    IndexOutOfRange { value: u32, max: usize },
    #[error("card number {value} is out of range (0..={max})")]
    NumberOutOfRange { value: u32, max: u8 },
    #[error("script has no rules")]
    Empty,
    #[error("{0}")]
    Malformed(String),
}

/// Emit the canonical short form: one rule per line, conjuncts joined by
/// ` and `, LF endings, a newline after every rule.
pub fn serialize_script(script: &Script) -> String {
    let mut out = String::new();
    for rule in &script.rules {
        for (i, predicate) in rule.conjuncts.iter().enumerate() {
            if i > 0 {
                out.push_str(" and ");
            }
            write_predicate(&mut out, predicate);
        }
        out.push('\n');
    }
    out
}

fn write_predicate(out: &mut String, predicate: &Predicate) {
    use std::fmt::Write;
    match *predicate {
        Predicate::GivesRacko => out.push_str("givesRacko(a)"),
        Predicate::HasRacko => out.push_str("hasRacko(rack)"),
        Predicate::IsBigger { index } => write!(out, "isBigger(a, {index})").unwrap(),
        Predicate::IsSmaller { index } => write!(out, "isSmaller(a, {index})").unwrap(),
        Predicate::IsCardBetweenNumbers { lo, hi, index } => {
            write!(out, "isCardBetweenNumbers(a, {lo}, {hi}, {index})").unwrap()
        }
    }
}

/// Parse a script, leniently. Blank lines and `#` comment lines are
/// skipped; everything else must be a rule. Errors carry the 1-based
/// physical line number.
pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens = tokenize(line, line_no)?;
        rules.push(LineParser { tokens: &tokens, pos: 0, line: line_no }.parse_rule()?);
    }
    if rules.is_empty() {
        return Err(ParseError { line: 1, kind: ParseErrorKind::Empty });
    }
    Ok(Script::new(rules))
}

#[derive(Debug, PartialEq)]
enum Token {
    Ident(String),
    Number(u32),
    LParen,
    RParen,
    Comma,
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let err = |msg: String| ParseError { line: line_no, kind: ParseErrorKind::Malformed(msg) };
    let mut tokens = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            ',' => {
                tokens.push(Token::Comma);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &line[start..i];
                let value = text
                    .parse::<u32>()
                    .map_err(|_| err(format!("number `{text}` is too large")))?;
                tokens.push(Token::Number(value));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.')
                {
                    i += 1;
                }
                tokens.push(Token::Ident(line[start..i].to_string()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

/// A parsed argument. Commas between arguments are optional (the corpus of
/// evolved scripts contains a rule that drops one), and hand arguments are
/// accepted anywhere the verbose form writes them.
#[derive(Debug, PartialEq, Clone, Copy)]
enum Arg {
    Action,
    Hand,
    Num(u32),
}

struct LineParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn malformed(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, kind: ParseErrorKind::Malformed(msg.into()) }
    }

    fn parse_rule(mut self) -> Result<Rule, ParseError> {
        let mut conjuncts = vec![self.parse_conjunct()?];
        while let Some(Token::Ident(word)) = self.tokens.get(self.pos) {
            if word != "and" {
                break;
            }
            self.pos += 1;
            conjuncts.push(self.parse_conjunct()?);
        }
        if self.pos != self.tokens.len() {
            return Err(self.malformed("trailing input after the rule"));
        }
        Ok(Rule { conjuncts })
    }

    fn parse_conjunct(&mut self) -> Result<Predicate, ParseError> {
        let name = match self.tokens.get(self.pos) {
            Some(Token::Ident(name)) => name.clone(),
            _ => return Err(self.malformed("expected a predicate call")),
        };
        self.pos += 1;
        let name = name.strip_prefix("DSL.").unwrap_or(&name).to_string();
        match self.tokens.get(self.pos) {
            Some(Token::LParen) => self.pos += 1,
            _ => return Err(self.malformed(format!("expected `(` after `{name}`"))),
        }
        let args = self.parse_args()?;
        self.build_predicate(&name, &args)
    }

    /// Consume arguments up to and including the closing `)`.
    fn parse_args(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        loop {
            match self.tokens.get(self.pos) {
                Some(Token::RParen) => {
                    self.pos += 1;
                    return Ok(args);
                }
                Some(Token::Comma) => self.pos += 1,
                Some(Token::Number(n)) => {
                    args.push(Arg::Num(*n));
                    self.pos += 1;
                }
                Some(Token::Ident(word)) => match word.as_str() {
                    "a" => {
                        args.push(Arg::Action);
                        self.pos += 1;
                    }
                    "rack" => {
                        args.push(Arg::Hand);
                        self.pos += 1;
                    }
                    "Game.getRack" => {
                        self.pos += 1;
                        match (self.tokens.get(self.pos), self.tokens.get(self.pos + 1)) {
                            (Some(Token::LParen), Some(Token::RParen)) => self.pos += 2,
                            _ => return Err(self.malformed("expected `()` after `Game.getRack`")),
                        }
                        args.push(Arg::Hand);
                    }
                    other => return Err(self.malformed(format!("unknown argument `{other}`"))),
                },
                Some(Token::LParen) => return Err(self.malformed("unexpected `(`")),
                None => return Err(self.malformed("unclosed argument list")),
            }
        }
    }

    fn build_predicate(&self, name: &str, args: &[Arg]) -> Result<Predicate, ParseError> {
        let bad = || ParseError {
            line: self.line,
            kind: ParseErrorKind::BadArguments(name.to_string()),
        };
        let slot = |value: u32| -> Result<usize, ParseError> {
            if value as usize > MAX_SLOT_INDEX {
                Err(ParseError {
                    line: self.line,
                    kind: ParseErrorKind::IndexOutOfRange { value, max: MAX_SLOT_INDEX },
                })
            } else {
                Ok(value as usize)
            }
        };
        let number = |value: u32| -> Result<u8, ParseError> {
            if value > MAX_CARD_NUMBER as u32 {
                Err(ParseError {
                    line: self.line,
                    kind: ParseErrorKind::NumberOutOfRange { value, max: MAX_CARD_NUMBER },
                })
            } else {
                Ok(value as u8)
            }
        };

        match name {
            "givesRacko" => match args {
                [Arg::Action] | [Arg::Action, Arg::Hand] => Ok(Predicate::GivesRacko),
                _ => Err(bad()),
            },
            "hasRacko" => match args {
                [Arg::Hand] => Ok(Predicate::HasRacko),
                _ => Err(bad()),
            },
            "isBigger" | "isSmaller" => {
                let index = match args {
                    [Arg::Action, Arg::Num(i)] | [Arg::Action, Arg::Num(i), Arg::Hand] => slot(*i)?,
                    _ => return Err(bad()),
                };
                if name == "isBigger" {
                    Ok(Predicate::IsBigger { index })
                } else {
                    Ok(Predicate::IsSmaller { index })
                }
            }
            "isCardBetweenNumbers" => match args {
                [Arg::Action, Arg::Num(lo), Arg::Num(hi), Arg::Num(i)]
                | [Arg::Action, Arg::Num(lo), Arg::Num(hi), Arg::Num(i), Arg::Hand] => {
                    Ok(Predicate::IsCardBetweenNumbers {
                        lo: number(*lo)?,
                        hi: number(*hi)?,
                        index: slot(*i)?,
                    })
                }
                _ => Err(bad()),
            },
            other => Err(ParseError {
                line: self.line,
                kind: ParseErrorKind::UnknownPredicate(other.to_string()),
            }),
        }
    }
}
