//! The sectioned TOML configuration.
//!
//! Six sections are recognised: `run`, `population`, `island`, `fitness`,
//! `evolutionary` and `parallel`. Every key is optional and falls back to the
//! default listed in [`KEYS`]; unknown sections or keys are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qevo_core::{EvalContext, EvolutionConfig, FitnessWeights, IslandConfig, MutationConfig, StrategySet, TargetState};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ModeSetting;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown config key `{key}`")]
    UnknownKey { key: String },
    #[error("config key `{key}`: {message}")]
    Range { key: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Root seed; drawn from entropy when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub qubit_limit: usize,
    pub trial_timeout_secs: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: None,
            qubit_limit: qevo_core::state::DEFAULT_QUBIT_LIMIT,
            trial_timeout_secs: 1800,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSection {
    pub size: usize,
    pub min_depth: usize,
    pub max_depth: usize,
    pub elite_count: usize,
    pub immigrant_count: usize,
}

impl Default for PopulationSection {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        Self {
            size: e.population_size,
            min_depth: e.min_depth,
            max_depth: e.max_depth,
            elite_count: e.elite_count,
            immigrant_count: e.immigrant_count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IslandSection {
    pub enabled: bool,
    pub count: usize,
    pub migration_interval: usize,
    pub migration_count: usize,
    pub warmup_fraction: f64,
}

impl Default for IslandSection {
    fn default() -> Self {
        let i = IslandConfig::default();
        Self {
            enabled: i.enabled,
            count: i.count,
            migration_interval: i.migration_interval,
            migration_count: i.migration_count,
            warmup_fraction: i.warmup_fraction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessSection {
    pub w_fidelity: f64,
    pub w_depth: f64,
    pub w_tops: f64,
    /// Penalty normalizer; `population.max_depth` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max: Option<usize>,
    /// Fidelity at which a run counts as successful in reports.
    pub success_fidelity: f64,
}

impl Default for FitnessSection {
    fn default() -> Self {
        let w = FitnessWeights::default();
        Self {
            w_fidelity: w.w_fidelity,
            w_depth: w.w_depth,
            w_tops: w.w_tops,
            d_max: None,
            success_fidelity: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionarySection {
    pub generations: usize,
    pub stop_fidelity: f64,
    pub tournament_k: usize,
    /// Tournament size for elite picking; exact top-k when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elite_tournament_k: Option<usize>,
    #[serde(with = "strategy_list")]
    pub strategies: StrategySet,
    pub mutation_rate: f64,
    pub mutations_per_candidate: usize,
    pub adaptive: bool,
    pub adaptive_alpha: f64,
    pub adaptive_beta: f64,
    pub optimize_each_eval: bool,
}

impl Default for EvolutionarySection {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        let m = MutationConfig::default();
        Self {
            generations: e.generations,
            stop_fidelity: e.stop_fidelity,
            tournament_k: e.tournament_k,
            elite_tournament_k: e.elite_tournament_k,
            strategies: m.strategies,
            mutation_rate: m.rate,
            mutations_per_candidate: m.mutations_per_candidate,
            adaptive: m.adaptive,
            adaptive_alpha: m.alpha,
            adaptive_beta: m.beta,
            optimize_each_eval: e.optimize_offspring,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParallelSection {
    #[serde(with = "mode_string")]
    pub mode: ModeSetting,
    /// Worker threads; 0 means hardware parallelism.
    pub workers: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub population: PopulationSection,
    pub island: IslandSection,
    pub fitness: FitnessSection,
    pub evolutionary: EvolutionarySection,
    pub parallel: ParallelSection,
}

mod strategy_list {
    use qevo_core::StrategySet;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(set: &StrategySet, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(set.members().iter().map(|m| m.name()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<StrategySet, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            List(Vec<String>),
            Joined(String),
        }
        let joined = match Repr::deserialize(d)? {
            Repr::List(items) => items.join("+"),
            Repr::Joined(s) => s,
        };
        joined.parse().map_err(D::Error::custom)
    }
}

mod mode_string {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::eval::ModeSetting;

    pub fn serialize<S: Serializer>(mode: &ModeSetting, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(mode.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ModeSetting, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// Documentation of one configuration key.
#[derive(Clone, Copy, Debug)]
pub struct KeyDoc {
    pub section: &'static str,
    pub key: &'static str,
    pub default: &'static str,
    pub domain: &'static str,
    pub help: &'static str,
}

const fn key(
    section: &'static str,
    key: &'static str,
    default: &'static str,
    domain: &'static str,
    help: &'static str,
) -> KeyDoc {
    KeyDoc {
        section,
        key,
        default,
        domain,
        help,
    }
}

pub const SECTIONS: [&str; 6] = ["run", "population", "island", "fitness", "evolutionary", "parallel"];

pub const KEYS: &[KeyDoc] = &[
    key(
        "run",
        "seed",
        "from entropy",
        "0..=2^63-1",
        "root seed of all random streams",
    ),
    key(
        "run",
        "qubit_limit",
        "12",
        "1..=24",
        "largest qubit count the simulator accepts",
    ),
    key(
        "run",
        "trial_timeout_secs",
        "1800",
        "integer >= 1",
        "wall-clock budget per tuning trial",
    ),
    key(
        "population",
        "size",
        "100",
        "integer >= 2",
        "candidates per generation (split across islands)",
    ),
    key("population", "min_depth", "1", "1..=max_depth", "shortest genome"),
    key("population", "max_depth", "30", "min_depth..=10000", "longest genome"),
    key(
        "population",
        "elite_count",
        "2",
        "elite_count + immigrant_count < size",
        "candidates copied unchanged",
    ),
    key(
        "population",
        "immigrant_count",
        "10",
        "elite_count + immigrant_count < size",
        "fresh random candidates per generation",
    ),
    key(
        "island",
        "enabled",
        "false",
        "bool",
        "split the population into a ring of islands",
    ),
    key("island", "count", "4", "1..=size", "number of islands"),
    key(
        "island",
        "migration_interval",
        "10",
        "integer >= 1",
        "generations between migrations",
    ),
    key(
        "island",
        "migration_count",
        "2",
        "below the island size",
        "best candidates copied to the next island",
    ),
    key(
        "island",
        "warmup_fraction",
        "0.5",
        "[0, 1]",
        "fraction of the run before migration starts",
    ),
    key("fitness", "w_fidelity", "1.0", "> 0", "fidelity weight"),
    key("fitness", "w_depth", "0.1", ">= 0", "depth penalty weight"),
    key("fitness", "w_tops", "0.05", ">= 0", "T-count penalty weight"),
    key(
        "fitness",
        "d_max",
        "population.max_depth",
        "integer >= 1",
        "normalizer of both penalties",
    ),
    key(
        "fitness",
        "success_fidelity",
        "0.95",
        "(0, 1]",
        "fidelity counted as success in reports",
    ),
    key("evolutionary", "generations", "150", "integer >= 1", "generation cap"),
    key(
        "evolutionary",
        "stop_fidelity",
        "0.99",
        "(0, 1]",
        "stop once the best fidelity reaches this",
    ),
    key(
        "evolutionary",
        "tournament_k",
        "2",
        "1..=size",
        "parent tournament size",
    ),
    key(
        "evolutionary",
        "elite_tournament_k",
        "size (exact top-k)",
        "integer >= 1",
        "elite tournament size",
    ),
    key(
        "evolutionary",
        "strategies",
        "[\"delete\", \"swap\"]",
        "non-empty subset of change, delete, add, swap",
        "mutation operators",
    ),
    key(
        "evolutionary",
        "mutation_rate",
        "0.25",
        "[0, 1]",
        "probability that an offspring is mutated",
    ),
    key(
        "evolutionary",
        "mutations_per_candidate",
        "1",
        "1..=100",
        "operators applied to a mutated offspring",
    ),
    key(
        "evolutionary",
        "adaptive",
        "false",
        "bool",
        "scale the rate by diversity and progress",
    ),
    key(
        "evolutionary",
        "adaptive_alpha",
        "0.5",
        ">= 0",
        "diversity gain of the adaptive rate",
    ),
    key(
        "evolutionary",
        "adaptive_beta",
        "0.3",
        "[0, 1]",
        "floor of the progress factor",
    ),
    key(
        "evolutionary",
        "optimize_each_eval",
        "false",
        "bool",
        "run the rewrite optimizer on every offspring",
    ),
    key(
        "parallel",
        "mode",
        "auto",
        "auto | parallel | serial_single | serial_batch",
        "evaluation schedule",
    ),
    key(
        "parallel",
        "workers",
        "0",
        "integer >= 0 (0 = all cores)",
        "worker threads; QEVO_WORKERS overrides",
    ),
];

/// Text printed by `--help config`.
pub fn help_text() -> String {
    let mut out = String::from("Configuration file: TOML with the sections below. All keys are optional.\n");
    for section in SECTIONS {
        let _ = writeln!(out, "\n[{section}]");
        for k in KEYS.iter().filter(|k| k.section == section) {
            let _ = writeln!(
                out,
                "  {:<24} default: {:<22} domain: {}\n  {:<24} {}",
                k.key, k.default, k.domain, "", k.help
            );
        }
    }
    out
}

fn line_of(text: &str, offset: usize) -> usize {
    1 + text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
}

fn range(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.to_owned(),
        message: message.into(),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_owned(),
        })?;
        for (section, value) in &table {
            if !SECTIONS.contains(&section.as_str()) {
                return Err(ConfigError::UnknownKey { key: section.clone() });
            }
            let Some(entries) = value.as_table() else {
                return Err(ConfigError::Parse {
                    line: 1,
                    message: format!("`{section}` must be a section"),
                });
            };
            for k in entries.keys() {
                if !KEYS.iter().any(|d| d.section == section && d.key == k) {
                    return Err(ConfigError::UnknownKey {
                        key: format!("{section}.{k}"),
                    });
                }
            }
        }
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_owned(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every key against its documented domain.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.run;
        if r.seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(range("run.seed", "must not exceed 2^63 - 1"));
        }
        if !(1..=24).contains(&r.qubit_limit) {
            return Err(range("run.qubit_limit", "must lie in 1..=24"));
        }
        if r.trial_timeout_secs == 0 {
            return Err(range("run.trial_timeout_secs", "must be positive"));
        }

        let p = &self.population;
        if p.size < 2 {
            return Err(range("population.size", "must be at least 2"));
        }
        if p.min_depth == 0 {
            return Err(range("population.min_depth", "must be positive"));
        }
        if p.max_depth < p.min_depth || p.max_depth > 10_000 {
            return Err(range("population.max_depth", "must lie in min_depth..=10000"));
        }
        if p.elite_count + p.immigrant_count >= p.size {
            return Err(range(
                "population.elite_count",
                "elite_count + immigrant_count must be below size",
            ));
        }

        let i = &self.island;
        if i.count == 0 || i.count > p.size {
            return Err(range("island.count", "must lie in 1..=population.size"));
        }
        if i.migration_interval == 0 {
            return Err(range("island.migration_interval", "must be positive"));
        }
        if !(0.0..=1.0).contains(&i.warmup_fraction) {
            return Err(range("island.warmup_fraction", "must lie in [0, 1]"));
        }
        if i.enabled {
            let island_size = p.size / i.count;
            if p.elite_count + p.immigrant_count >= island_size {
                return Err(range(
                    "island.count",
                    format!("islands of {island_size} cannot hold the elites and immigrants"),
                ));
            }
            if i.migration_count >= island_size {
                return Err(range(
                    "island.migration_count",
                    format!("must be below the island size {island_size}"),
                ));
            }
        }

        let f = &self.fitness;
        if !(f.w_fidelity > 0.0 && f.w_fidelity.is_finite()) {
            return Err(range("fitness.w_fidelity", "must be positive"));
        }
        if !(f.w_depth >= 0.0 && f.w_depth.is_finite()) {
            return Err(range("fitness.w_depth", "must be non-negative"));
        }
        if !(f.w_tops >= 0.0 && f.w_tops.is_finite()) {
            return Err(range("fitness.w_tops", "must be non-negative"));
        }
        if f.d_max == Some(0) {
            return Err(range("fitness.d_max", "must be positive"));
        }
        if !(f.success_fidelity > 0.0 && f.success_fidelity <= 1.0) {
            return Err(range("fitness.success_fidelity", "must lie in (0, 1]"));
        }

        let e = &self.evolutionary;
        if e.generations == 0 {
            return Err(range("evolutionary.generations", "must be positive"));
        }
        if !(e.stop_fidelity > 0.0 && e.stop_fidelity <= 1.0) {
            return Err(range("evolutionary.stop_fidelity", "must lie in (0, 1]"));
        }
        if e.tournament_k == 0 || e.tournament_k > p.size {
            return Err(range("evolutionary.tournament_k", "must lie in 1..=population.size"));
        }
        if e.elite_tournament_k == Some(0) {
            return Err(range("evolutionary.elite_tournament_k", "must be positive"));
        }
        if !(0.0..=1.0).contains(&e.mutation_rate) {
            return Err(range("evolutionary.mutation_rate", "must lie in [0, 1]"));
        }
        if !(1..=100).contains(&e.mutations_per_candidate) {
            return Err(range("evolutionary.mutations_per_candidate", "must lie in 1..=100"));
        }
        if !(e.adaptive_alpha >= 0.0 && e.adaptive_alpha.is_finite()) {
            return Err(range("evolutionary.adaptive_alpha", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&e.adaptive_beta) {
            return Err(range("evolutionary.adaptive_beta", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// The effective configuration as TOML; parses back to an equal value.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// Applies `section.key = value` overrides and revalidates.
    pub fn with_overrides<'a>(
        &self,
        overrides: impl IntoIterator<Item = (&'a str, toml::Value)>,
    ) -> Result<Config, ConfigError> {
        let mut table = toml::Table::try_from(self).expect("config is serializable");
        for (dotted, value) in overrides {
            let (section, k) = dotted
                .split_once('.')
                .ok_or_else(|| ConfigError::UnknownKey { key: dotted.to_owned() })?;
            if !KEYS.iter().any(|d| d.section == section && d.key == k) {
                return Err(ConfigError::UnknownKey { key: dotted.to_owned() });
            }
            table
                .entry(section)
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .expect("sections are tables")
                .insert(k.to_owned(), value);
        }
        Config::parse(&toml::to_string(&table).expect("table is serializable"))
    }

    /// The run seed, drawing and recording one from entropy if unset.
    pub fn resolve_seed(&mut self) -> u64 {
        *self.run.seed.get_or_insert_with(|| {
            let seed = rand::random::<u64>() >> 1;
            log::info!("no run.seed configured; drew {seed} from entropy");
            seed
        })
    }

    pub fn d_max(&self) -> usize {
        self.fitness.d_max.unwrap_or(self.population.max_depth)
    }

    pub fn weights(&self) -> FitnessWeights {
        FitnessWeights {
            w_fidelity: self.fitness.w_fidelity,
            w_depth: self.fitness.w_depth,
            w_tops: self.fitness.w_tops,
        }
    }

    pub fn mutation(&self) -> MutationConfig {
        let e = &self.evolutionary;
        MutationConfig {
            strategies: e.strategies,
            rate: e.mutation_rate,
            mutations_per_candidate: e.mutations_per_candidate,
            adaptive: e.adaptive,
            alpha: e.adaptive_alpha,
            beta: e.adaptive_beta,
        }
    }

    /// Whole-population parameters (before any island split).
    pub fn evolution(&self) -> EvolutionConfig {
        let p = &self.population;
        let e = &self.evolutionary;
        EvolutionConfig {
            population_size: p.size,
            elite_count: p.elite_count,
            elite_tournament_k: e.elite_tournament_k,
            immigrant_count: p.immigrant_count,
            tournament_k: e.tournament_k,
            min_depth: p.min_depth,
            max_depth: p.max_depth,
            mutation: self.mutation(),
            generations: e.generations,
            stop_fidelity: e.stop_fidelity,
            optimize_offspring: e.optimize_each_eval,
        }
    }

    pub fn islands(&self) -> IslandConfig {
        let i = &self.island;
        IslandConfig {
            enabled: i.enabled,
            count: i.count,
            migration_interval: i.migration_interval,
            migration_count: i.migration_count,
            warmup_fraction: i.warmup_fraction,
        }
    }

    pub fn eval_context(&self, target: TargetState) -> EvalContext {
        EvalContext {
            target,
            weights: self.weights(),
            d_max: self.d_max(),
            qubit_limit: self.run.qubit_limit,
        }
    }
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = Config::parse(&text)?;
    log::info!(
        "effective configuration from {}:\n{}",
        path.display(),
        cfg.to_toml_string()
    );
    Ok(cfg)
}
