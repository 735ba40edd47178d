//! Two-stage uniform random search over configuration keys.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use toml::Value;

use super::study::{run_study, StudyOptions};
use crate::config::Config;
use crate::dataset::TargetRecord;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Structure: depth bounds and islands.
    One,
    /// Mutation and selection pressure.
    Two,
}

impl Stage {
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Stage::One => &[
                "population.min_depth",
                "population.max_depth",
                "island.enabled",
                "island.count",
            ],
            Stage::Two => &[
                "evolutionary.mutation_rate",
                "evolutionary.mutations_per_candidate",
                "evolutionary.adaptive",
                "evolutionary.adaptive_alpha",
                "evolutionary.adaptive_beta",
                "evolutionary.tournament_k",
                "population.elite_count",
                "population.immigrant_count",
            ],
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Stage::One),
            "2" => Ok(Stage::Two),
            other => Err(Error::InvalidInput(format!(
                "search stage must be 1 or 2, got `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamRange {
    Int { min: i64, max: i64 },
    Float { min: f64, max: f64 },
    Choice(Vec<Value>),
}

impl ParamRange {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match self {
            ParamRange::Int { min, max } => Value::Integer(rng.gen_range(*min..=*max)),
            ParamRange::Float { min, max } if min == max => Value::Float(*min),
            ParamRange::Float { min, max } => Value::Float(rng.gen_range(*min..*max)),
            ParamRange::Choice(items) => items[rng.gen_range(0..items.len())].clone(),
        }
    }

    fn is_within(&self, outer: &ParamRange) -> bool {
        match (self, outer) {
            (ParamRange::Int { min, max }, ParamRange::Int { min: lo, max: hi }) => lo <= min && max <= hi,
            (ParamRange::Float { min, max }, ParamRange::Float { min: lo, max: hi }) => lo <= min && max <= hi,
            (ParamRange::Choice(inner), ParamRange::Choice(all)) => inner.iter().all(|v| all.contains(v)),
            _ => false,
        }
    }

    fn parse(key: &str, value: &Value) -> Result<Self> {
        let bad = || {
            Error::InvalidInput(format!(
                "bounds for `{key}` must be [min, max], a list of choices or {{ choices = [...] }}"
            ))
        };
        match value {
            Value::Table(t) => match t.get("choices") {
                Some(Value::Array(items)) if !items.is_empty() && t.len() == 1 => Ok(ParamRange::Choice(items.clone())),
                _ => Err(bad()),
            },
            Value::Array(items) => match items.as_slice() {
                [Value::Integer(a), Value::Integer(b)] if a <= b => Ok(ParamRange::Int { min: *a, max: *b }),
                [Value::Integer(_), Value::Integer(_)] => Err(bad()),
                [a, b] if a.as_float().is_some() || b.as_float().is_some() => {
                    let num = |v: &Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
                    match (num(a), num(b)) {
                        (Some(a), Some(b)) if a <= b && a.is_finite() && b.is_finite() => {
                            Ok(ParamRange::Float { min: a, max: b })
                        }
                        _ => Err(bad()),
                    }
                }
                [] => Err(bad()),
                items if items.iter().all(|v| !v.is_array() && !v.is_table()) => Ok(ParamRange::Choice(items.to_vec())),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

/// Sampling ranges keyed by `section.key`.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchBounds {
    pub params: BTreeMap<String, ParamRange>,
}

impl SearchBounds {
    /// Reads a TOML file laid out like a config file, each key holding a
    /// range instead of a value:
    ///
    /// ```toml
    /// [evolutionary]
    /// mutation_rate = [0.05, 0.5]
    /// adaptive = [true, false]
    /// ```
    pub fn parse(text: &str, stage: Stage) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<bounds>".into(),
            line: e.span().map_or(1, |s| 1 + text[..s.start].matches('\n').count()),
            message: e.message().to_owned(),
        })?;
        let mut params = BTreeMap::new();
        for (section, entries) in &table {
            let entries = entries
                .as_table()
                .ok_or_else(|| Error::InvalidInput(format!("bounds entry `{section}` must be a section")))?;
            for (k, v) in entries {
                let key = format!("{section}.{k}");
                params.insert(key.clone(), ParamRange::parse(&key, v)?);
            }
        }
        let bounds = Self { params };
        bounds.check_stage(stage)?;
        Ok(bounds)
    }

    pub fn check_stage(&self, stage: Stage) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::InvalidInput("search bounds are empty".into()));
        }
        for key in self.params.keys() {
            if !stage.keys().contains(&key.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "`{key}` is not searched in stage {}; allowed: {}",
                    if stage == Stage::One { 1 } else { 2 },
                    stage.keys().join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Wide default ranges for each stage.
    pub fn default_for(stage: Stage) -> Self {
        let int = |min, max| ParamRange::Int { min, max };
        let float = |min, max| ParamRange::Float { min, max };
        let flag = || ParamRange::Choice(vec![Value::Boolean(false), Value::Boolean(true)]);
        let params: Vec<(&str, ParamRange)> = match stage {
            Stage::One => vec![
                ("population.min_depth", int(1, 8)),
                ("population.max_depth", int(10, 40)),
                ("island.enabled", flag()),
                ("island.count", int(2, 8)),
            ],
            Stage::Two => vec![
                ("evolutionary.mutation_rate", float(0.01, 1.0)),
                ("evolutionary.mutations_per_candidate", int(1, 5)),
                ("evolutionary.adaptive", flag()),
                ("evolutionary.tournament_k", int(2, 8)),
            ],
        };
        Self {
            params: params.into_iter().map(|(k, r)| (k.to_owned(), r)).collect(),
        }
    }

    /// Every range lies inside the corresponding range of `outer`.
    pub fn is_within(&self, outer: &SearchBounds) -> bool {
        self.params
            .iter()
            .all(|(k, r)| outer.params.get(k).is_some_and(|o| r.is_within(o)))
    }

    /// Shrinks each numeric range to `fraction` of its width around the
    /// value `center` holds for that key, staying inside the original range.
    /// Choices are narrowed to the centre value.
    pub fn narrow_around(&self, center: &[(String, Value)], fraction: f64) -> SearchBounds {
        let fraction = fraction.clamp(0.0, 1.0);
        let mut params = self.params.clone();
        for (key, value) in center {
            let Some(range) = params.get_mut(key) else { continue };
            *range = match (&*range, value) {
                (ParamRange::Int { min, max }, Value::Integer(c)) => {
                    let half = (((max - min) as f64 * fraction) / 2.0).round() as i64;
                    let c = (*c).clamp(*min, *max);
                    ParamRange::Int {
                        min: (c - half).max(*min),
                        max: (c + half).min(*max),
                    }
                }
                (ParamRange::Float { min, max }, Value::Float(c)) => {
                    let half = (max - min) * fraction / 2.0;
                    let c = c.clamp(*min, *max);
                    ParamRange::Float {
                        min: (c - half).max(*min),
                        max: (c + half).min(*max),
                    }
                }
                (ParamRange::Choice(items), v) if items.contains(v) => ParamRange::Choice(vec![v.clone()]),
                (other, _) => other.clone(),
            };
        }
        SearchBounds { params }
    }

    /// One parameter assignment, drawn in key order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(String, Value)> {
        self.params.iter().map(|(k, r)| (k.clone(), r.sample(rng))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Scored(f64),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub id: usize,
    pub params: Vec<(String, Value)>,
    pub outcome: TrialOutcome,
    pub wall_time: Duration,
}

impl Trial {
    pub fn score(&self) -> Option<f64> {
        match self.outcome {
            TrialOutcome::Scored(s) => Some(s),
            TrialOutcome::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Highest-scoring trial (earliest on ties) and its configuration.
    pub best: Option<(usize, Config)>,
    pub trials: Vec<Trial>,
}

/// What each trial is scored on.
#[derive(Clone, Copy, Debug)]
pub struct TrialSetup<'a> {
    pub dataset: &'a [TargetRecord],
    pub base: &'a Config,
    pub seeds: &'a [u64],
    pub jobs: usize,
}

/// Draws `budget` assignments uniformly within `bounds` and scores each.
pub fn hyperparameter_search<R: Rng + ?Sized>(
    stage: Stage,
    bounds: &SearchBounds,
    budget: usize,
    setup: TrialSetup<'_>,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::InvalidInput("search budget must be at least 1".into()));
    }
    bounds.check_stage(stage)?;
    let assignments: Vec<_> = (0..budget).map(|_| bounds.sample(rng)).collect();
    Ok(evaluate_trials(assignments, setup))
}

/// Scores each assignment by the performance metric of a study over the
/// base configuration's strategy set. Failing trials are recorded and
/// skipped.
pub fn evaluate_trials(assignments: Vec<Vec<(String, Value)>>, setup: TrialSetup<'_>) -> SearchOutcome {
    let mut trials = Vec::with_capacity(assignments.len());
    let mut best: Option<(usize, f64, Config)> = None;
    for (id, params) in assignments.into_iter().enumerate() {
        let start = Instant::now();
        let scored = score_trial(&params, setup, start);
        let outcome = match scored {
            Ok((score, cfg)) => {
                if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                    best = Some((id, score, cfg));
                }
                TrialOutcome::Scored(score)
            }
            Err(e) => {
                log::warn!("trial {id} failed: {e}");
                TrialOutcome::Failed(e.to_string())
            }
        };
        log::info!("trial {id}: {outcome:?}");
        trials.push(Trial {
            id,
            params,
            outcome,
            wall_time: start.elapsed(),
        });
    }
    SearchOutcome {
        best: best.map(|(id, _, cfg)| (id, cfg)),
        trials,
    }
}

fn score_trial(params: &[(String, Value)], setup: TrialSetup<'_>, start: Instant) -> Result<(f64, Config)> {
    let cfg = setup
        .base
        .with_overrides(params.iter().map(|(k, v)| (k.as_str(), v.clone())))?;
    let options = StudyOptions {
        jobs: setup.jobs,
        deadline: Some(start + Duration::from_secs(cfg.run.trial_timeout_secs)),
    };
    let studies = run_study(
        setup.dataset,
        &[cfg.evolutionary.strategies],
        &cfg,
        setup.seeds,
        options,
    )?;
    Ok((studies[0].performance, cfg))
}
