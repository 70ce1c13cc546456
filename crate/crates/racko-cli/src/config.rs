//! Run-parameter resolution: defaults ← config file ← flags, with preset
//! names expanding to the three canned experiments. A preset pins its
//! parameters — an explicit flag or file value may repeat a pinned value
//! but never contradict it, so every number in a preset run is traceable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use racko::dsl::GrammarConfig;
use racko::evolve::GAConfig;

use crate::cli::{EvolveArgs, Preset};

impl Preset {
    pub fn expand(self) -> GAConfig {
        match self {
            Preset::Case1 => GAConfig::case1(),
            Preset::Case2 => GAConfig::case2(),
            Preset::Case3 => GAConfig::case3(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Case1 => "case1",
            Preset::Case2 => "case2",
            Preset::Case3 => "case3",
        }
    }
}

/// What one run will actually do; echoed verbatim into run.json.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    #[serde(flatten)]
    pub ga: GAConfig,
    pub out_dir: PathBuf,
}

/// The JSON config file: every field optional, so what the user actually
/// wrote stays distinguishable from defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    population_size: Option<usize>,
    generations: Option<usize>,
    elites: Option<usize>,
    tournament_size: Option<usize>,
    games_per_match: Option<usize>,
    repeats_per_seat: Option<usize>,
    turn_cap: Option<u32>,
    seed: Option<u64>,
    grammar: Option<GrammarConfig>,
}

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("cannot read config `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config `{path}`: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{origin} `{name}` = {value} contradicts preset {preset} ({name} = {pinned})")]
    PresetConflict { origin: &'static str, name: &'static str, value: u64, preset: String, pinned: u64 },
    #[error("{0}")]
    Invalid(#[from] racko::evolve::ConfigError),
}

/// One resolvable run parameter: where the preset pins it, where the file
/// and the flag may set it.
struct Param<'a> {
    name: &'static str,
    pinned_by_preset: bool,
    file: Option<u64>,
    flag: Option<u64>,
    slot: &'a mut u64,
}

fn apply(params: Vec<Param<'_>>, preset: Option<Preset>) -> Result<(), ResolveError> {
    for param in params {
        for (origin, value) in [("config file", param.file), ("flag", param.flag)] {
            let Some(value) = value else { continue };
            if param.pinned_by_preset && value != *param.slot {
                return Err(ResolveError::PresetConflict {
                    origin,
                    name: param.name,
                    value,
                    preset: preset.expect("pinned implies a preset").name().to_string(),
                    pinned: *param.slot,
                });
            }
            *param.slot = value;
        }
    }
    Ok(())
}

/// Resolve an `evolve` invocation into a full run configuration.
pub fn resolve(args: &EvolveArgs) -> Result<RunConfig, ResolveError> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };

    let mut ga = match args.preset {
        Some(preset) => preset.expand(),
        None => GAConfig::default(),
    };
    let pinned = args.preset.is_some();

    // The preset-pinned six. Everything funnels through u64 for uniform
    // conflict reporting; widths stay safe (usize and u32 both fit).
    let mut population = ga.population_size as u64;
    let mut generations = ga.generations as u64;
    let mut elites = ga.elites as u64;
    let mut tournament = ga.tournament_size as u64;
    let mut games = ga.games_per_match as u64;
    let mut repeats = ga.repeats_per_seat as u64;
    // Free parameters.
    let mut turn_cap = ga.turn_cap as u64;
    let mut seed = ga.seed;

    let params = vec![
        Param {
            name: "population_size",
            pinned_by_preset: pinned,
            file: file.population_size.map(|v| v as u64),
            flag: args.population.map(|v| v as u64),
            slot: &mut population,
        },
        Param {
            name: "generations",
            pinned_by_preset: pinned,
            file: file.generations.map(|v| v as u64),
            flag: args.generations.map(|v| v as u64),
            slot: &mut generations,
        },
        Param {
            name: "elites",
            pinned_by_preset: pinned,
            file: file.elites.map(|v| v as u64),
            flag: args.elites.map(|v| v as u64),
            slot: &mut elites,
        },
        Param {
            name: "tournament_size",
            pinned_by_preset: pinned,
            file: file.tournament_size.map(|v| v as u64),
            flag: args.tournament.map(|v| v as u64),
            slot: &mut tournament,
        },
        Param {
            name: "games_per_match",
            pinned_by_preset: pinned,
            file: file.games_per_match.map(|v| v as u64),
            flag: args.games.map(|v| v as u64),
            slot: &mut games,
        },
        Param {
            name: "repeats_per_seat",
            pinned_by_preset: pinned,
            file: file.repeats_per_seat.map(|v| v as u64),
            flag: args.repeats.map(|v| v as u64),
            slot: &mut repeats,
        },
        Param {
            name: "turn_cap",
            pinned_by_preset: false,
            file: file.turn_cap.map(u64::from),
            flag: args.turn_cap.map(u64::from),
            slot: &mut turn_cap,
        },
        Param {
            name: "seed",
            pinned_by_preset: false,
            file: file.seed,
            flag: args.seed,
            slot: &mut seed,
        },
    ];
    apply(params, args.preset)?;

    ga.population_size = population as usize;
    ga.generations = generations as usize;
    ga.elites = elites as usize;
    ga.tournament_size = tournament as usize;
    ga.games_per_match = games as usize;
    ga.repeats_per_seat = repeats as usize;
    ga.turn_cap = turn_cap as u32;
    ga.seed = seed;
    if let Some(grammar) = file.grammar {
        ga.grammar = grammar;
    }

    ga.validate()?;
    Ok(RunConfig {
        preset: args.preset.map(|p| p.name().to_string()),
        ga,
        out_dir: args.out.clone(),
    })
}

fn load_file(path: &Path) -> Result<FileConfig, ResolveError> {
    let text = std::fs::read_to_string(path).map_err(|source| ResolveError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ResolveError::Json {
        path: path.display().to_string(),
        source,
    })
}
