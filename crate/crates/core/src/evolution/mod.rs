//! The generational genetic algorithm.
//!
//! One step of [`evolve_generation`] builds the next population from three
//! parts, in this order:
//!
//! 1. elites, picked by tournament and copied unchanged (reports included);
//! 2. offspring, bred from tournament-selected parent pairs by single-point
//!    crossover followed by [`apply_mutations`];
//! 3. immigrants, fresh nontrivial random genomes.
//!
//! Offspring and immigrants are returned unevaluated.

mod crossover;
mod init;
mod mutation;
mod select;

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::circuit::Circuit;
use crate::fidelity::FitnessReport;
use crate::rewrite::optimize;

pub use crossover::{clamp_depth, single_point_crossover};
pub use init::{init_population, is_trivial, random_circuit, random_nontrivial, random_operation};
pub use mutation::{
    adaptive_rate, apply_mutations, apply_strategy, genome_distance, mutate_add, mutate_change, mutate_delete,
    mutate_swap, population_diversity, MutationConfig, Strategy, StrategySet, DIVERSITY_SAMPLE,
};
pub use select::{select_elites, tournament_select};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("could not draw enough nontrivial genomes in {attempts} attempts")]
    GenerationStalled { attempts: usize },
    #[error("candidate {index} has not been evaluated")]
    Unevaluated { index: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("diversity {0} outside [0, 1]")]
    InvalidDiversity(f64),
    #[error("crossover needs parents with at least two operations")]
    TooShort,
}

/// Inclusive genome length range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepthBounds {
    pub min: usize,
    pub max: usize,
}

impl DepthBounds {
    pub fn contains(&self, depth: usize) -> bool {
        (self.min..=self.max).contains(&depth)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub circuit: Circuit,
    pub report: Option<FitnessReport>,
}

impl Candidate {
    pub fn new(circuit: Circuit) -> Self {
        Self { circuit, report: None }
    }

    pub fn composite(&self) -> Option<f64> {
        self.report.map(|r| r.composite)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    candidates: Vec<Candidate>,
    generation: usize,
}

impl Population {
    pub fn new(candidates: Vec<Candidate>) -> Self {
        Self::with_generation(candidates, 0)
    }

    pub fn with_generation(candidates: Vec<Candidate>, generation: usize) -> Self {
        Self { candidates, generation }
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidates_mut(&mut self) -> &mut [Candidate] {
        &mut self.candidates
    }

    pub fn into_candidates(self) -> Vec<Candidate> {
        self.candidates
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn is_evaluated(&self) -> bool {
        self.candidates.iter().all(|c| c.report.is_some())
    }

    pub fn report(&self, index: usize) -> Result<&FitnessReport, EvolutionError> {
        self.candidates[index]
            .report
            .as_ref()
            .ok_or(EvolutionError::Unevaluated { index })
    }

    /// Index of the top-ranked candidate (highest composite, then lowest
    /// depth, then earliest index).
    pub fn best_index(&self) -> Result<usize, EvolutionError> {
        let mut best = 0;
        for i in 1..self.len() {
            if select::rank(self, i, best)? == core::cmp::Ordering::Less {
                best = i;
            }
        }
        if !self.is_empty() {
            self.report(best)?;
        }
        Ok(best)
    }

    pub fn best(&self) -> Result<&Candidate, EvolutionError> {
        Ok(&self.candidates[self.best_index()?])
    }

    /// Indices of all candidates ordered from best to worst.
    pub fn ranking(&self) -> Result<Vec<usize>, EvolutionError> {
        if let Some(index) = self.candidates.iter().position(|c| c.report.is_none()) {
            return Err(EvolutionError::Unevaluated { index });
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| select::rank(self, a, b).expect("all evaluated"));
        Ok(order)
    }

    pub fn max_fidelity(&self) -> Result<f64, EvolutionError> {
        (0..self.len()).try_fold(0.0f64, |m, i| Ok(m.max(self.report(i)?.fidelity)))
    }

    pub fn mean_composite(&self) -> Result<f64, EvolutionError> {
        let sum = (0..self.len()).try_fold(0.0, |s, i| Ok::<_, EvolutionError>(s + self.report(i)?.composite))?;
        Ok(sum / self.len().max(1) as f64)
    }

    pub(crate) fn replace(&mut self, index: usize, candidate: Candidate) {
        self.candidates[index] = candidate;
    }
}

/// Parameters of the generational loop.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub elite_count: usize,
    /// Tournament size used when picking elites; `None` means the whole
    /// population, i.e. exact top-k.
    pub elite_tournament_k: Option<usize>,
    pub immigrant_count: usize,
    /// Tournament size for parent selection.
    pub tournament_k: usize,
    pub min_depth: usize,
    pub max_depth: usize,
    pub mutation: MutationConfig,
    pub generations: usize,
    pub stop_fidelity: f64,
    /// Run the rewrite optimizer over every offspring.
    pub optimize_offspring: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            elite_count: 2,
            elite_tournament_k: None,
            immigrant_count: 10,
            tournament_k: 2,
            min_depth: 1,
            max_depth: 30,
            mutation: MutationConfig::default(),
            generations: 150,
            stop_fidelity: 0.99,
            optimize_offspring: false,
        }
    }
}

impl EvolutionConfig {
    pub fn bounds(&self) -> DepthBounds {
        DepthBounds {
            min: self.min_depth,
            max: self.max_depth,
        }
    }

    pub fn elite_k(&self) -> usize {
        self.elite_tournament_k.unwrap_or(self.population_size)
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::InvalidConfig(m));
        if self.population_size == 0 {
            return bad("population size must be positive".into());
        }
        if self.elite_count + self.immigrant_count >= self.population_size {
            return bad(alloc::format!(
                "elite_count + immigrant_count ({}) must be below population size {}",
                self.elite_count + self.immigrant_count,
                self.population_size
            ));
        }
        if !(1..=self.population_size).contains(&self.tournament_k) {
            return bad(alloc::format!(
                "tournament_k {} outside 1..={}",
                self.tournament_k,
                self.population_size
            ));
        }
        if self.elite_tournament_k == Some(0) {
            return bad("elite tournament size must be positive".into());
        }
        if self.min_depth == 0 || self.min_depth > self.max_depth {
            return bad(alloc::format!(
                "depth range {}..={} must satisfy 1 <= min <= max",
                self.min_depth,
                self.max_depth
            ));
        }
        if !(self.stop_fidelity > 0.0 && self.stop_fidelity <= 1.0) {
            return bad("stop_fidelity must lie in (0, 1]".into());
        }
        self.mutation.validate()
    }
}

/// Produces the next generation from an evaluated population.
pub fn evolve_generation<R: Rng + ?Sized>(
    pop: &Population,
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Result<Population, EvolutionError> {
    cfg.validate()?;
    if let Some(index) = pop.candidates().iter().position(|c| c.report.is_none()) {
        return Err(EvolutionError::Unevaluated { index });
    }
    if pop.len() != cfg.population_size {
        return Err(EvolutionError::InvalidConfig(alloc::format!(
            "population has {} candidates, config expects {}",
            pop.len(),
            cfg.population_size
        )));
    }
    let n_qubits = pop.candidates()[0].circuit.n_qubits();
    let bounds = cfg.bounds();
    let mut next = Vec::with_capacity(cfg.population_size);

    for index in select_elites(pop, cfg.elite_count, cfg.elite_k(), rng)? {
        next.push(pop.candidates()[index].clone());
    }

    let rate = if cfg.mutation.adaptive {
        let diversity = population_diversity(pop, rng);
        adaptive_rate(&cfg.mutation, diversity, pop.generation(), cfg.generations)?
    } else {
        cfg.mutation.rate
    };

    let offspring_target = cfg.population_size - cfg.immigrant_count;
    while next.len() < offspring_target {
        let pa = tournament_select(pop, cfg.tournament_k, rng)?;
        let pb = tournament_select(pop, cfg.tournament_k, rng)?;
        let (a, b) = (&pop.candidates()[pa].circuit, &pop.candidates()[pb].circuit);
        let (first, second) = match single_point_crossover(a, b, bounds, rng) {
            Ok(children) => children,
            // Parents too short to cut: mutate copies instead.
            Err(EvolutionError::TooShort) => (a.clone(), b.clone()),
            Err(e) => return Err(e),
        };
        for mut child in [first, second] {
            if next.len() == offspring_target {
                break;
            }
            apply_mutations(&mut child, &cfg.mutation, rate, bounds, rng);
            if cfg.optimize_offspring {
                let reduced = optimize(&child);
                if bounds.contains(reduced.len()) {
                    child = reduced;
                }
            }
            next.push(Candidate::new(child));
        }
    }

    let attempts = 100 * cfg.population_size;
    while next.len() < cfg.population_size {
        let c = random_nontrivial(n_qubits, cfg.min_depth, cfg.max_depth, attempts, rng)?;
        next.push(Candidate::new(c));
    }

    Ok(Population::with_generation(next, pop.generation() + 1))
}
