//! Island model: independent subpopulations on a ring with periodic
//! best-replaces-worst migration.

use alloc::vec::Vec;

use crate::eval::{EvalError, Evaluator};
use crate::evolution::{evolve_generation, init_population, EvolutionConfig, EvolutionError, Population};
use crate::rng::Lineage;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum IslandError {
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid island configuration: {0}")]
    InvalidConfig(alloc::string::String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IslandConfig {
    pub enabled: bool,
    pub count: usize,
    /// Generations between migrations.
    pub migration_interval: usize,
    /// Candidates each island sends to its ring successor.
    pub migration_count: usize,
    /// Fraction of the run that must elapse before migration starts.
    pub warmup_fraction: f64,
}

impl Default for IslandConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            count: 4,
            migration_interval: 10,
            migration_count: 2,
            warmup_fraction: 0.5,
        }
    }
}

impl IslandConfig {
    /// Number of islands actually used (one when the model is disabled).
    pub fn effective_count(&self) -> usize {
        if self.enabled {
            self.count
        } else {
            1
        }
    }

    /// Per-island evolution parameters: the population is split evenly.
    pub fn island_config(&self, global: &EvolutionConfig) -> Result<EvolutionConfig, IslandError> {
        let count = self.effective_count();
        if count == 0 {
            return Err(IslandError::InvalidConfig("island count must be positive".into()));
        }
        let mut cfg = global.clone();
        cfg.population_size = global.population_size / count;
        if let Some(k) = cfg.elite_tournament_k {
            cfg.elite_tournament_k = Some(k.min(cfg.population_size.max(1)));
        }
        cfg.tournament_k = cfg.tournament_k.min(cfg.population_size.max(1));
        cfg.validate()?;
        if self.enabled && count > 1 && self.migration_count >= cfg.population_size {
            return Err(IslandError::InvalidConfig(alloc::format!(
                "migration_count {} must be below the island size {}",
                self.migration_count,
                cfg.population_size
            )));
        }
        if self.migration_interval == 0 {
            return Err(IslandError::InvalidConfig("migration_interval must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return Err(IslandError::InvalidConfig("warmup_fraction must lie in [0, 1]".into()));
        }
        Ok(cfg)
    }
}

/// A ring of islands; island `i` sends migrants to island `(i + 1) % n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Archipelago {
    islands: Vec<Population>,
    lineages: Vec<Lineage>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MigrationOutcome {
    Migrated,
    /// Before the warmup fraction of the run; nothing moved.
    NotWarm,
    /// A single island has no neighbours.
    NoNeighbours,
}

impl Archipelago {
    /// Draws `count` initial island populations, island `i` from
    /// [`Lineage::island`]`(root_seed, i)`.
    pub fn init(
        island_cfg: &EvolutionConfig,
        n_qubits: usize,
        root_seed: u64,
        count: usize,
    ) -> Result<Self, IslandError> {
        let lineages: Vec<Lineage> = (0..count).map(|i| Lineage::island(root_seed, i)).collect();
        let islands = lineages
            .iter()
            .map(|l| init_population(island_cfg, n_qubits, &mut l.init()))
            .collect::<Result<_, _>>()?;
        Ok(Self { islands, lineages })
    }

    pub fn from_parts(islands: Vec<Population>, lineages: Vec<Lineage>) -> Result<Self, IslandError> {
        if islands.len() != lineages.len() || islands.is_empty() {
            return Err(IslandError::InvalidConfig("one lineage per island required".into()));
        }
        let size = islands[0].len();
        if islands.iter().any(|p| p.len() != size) {
            return Err(IslandError::InvalidConfig("islands differ in size".into()));
        }
        Ok(Self { islands, lineages })
    }

    pub fn islands(&self) -> &[Population] {
        &self.islands
    }

    pub fn lineages(&self) -> &[Lineage] {
        &self.lineages
    }

    pub fn generation(&self) -> usize {
        self.islands[0].generation()
    }

    pub fn total_candidates(&self) -> usize {
        self.islands.iter().map(Population::len).sum()
    }

    pub fn evaluate<E: Evaluator + ?Sized>(&mut self, evaluator: &E) -> Result<(), IslandError> {
        for island in &mut self.islands {
            evaluator.evaluate_population(island)?;
        }
        Ok(())
    }

    /// (island, index) of the top-ranked candidate over all islands.
    pub fn best(&self) -> Result<(usize, usize), IslandError> {
        let mut best: Option<(usize, usize, f64, usize)> = None;
        for (i, island) in self.islands.iter().enumerate() {
            let j = island.best_index()?;
            let r = island.report(j)?;
            let better = match best {
                None => true,
                Some((_, _, c, d)) => r.composite > c || (r.composite == c && r.depth < d),
            };
            if better {
                best = Some((i, j, r.composite, r.depth));
            }
        }
        best.map(|(i, j, _, _)| (i, j))
            .ok_or_else(|| IslandError::InvalidConfig("empty archipelago".into()))
    }
}

/// Each island sends copies of its `migration_count` best candidates to its
/// ring successor, which overwrites its `migration_count` worst. All
/// migrants are chosen before any island is modified.
pub fn migrate(
    arch: &mut Archipelago,
    cfg: &IslandConfig,
    generation: usize,
    total_generations: usize,
) -> Result<MigrationOutcome, IslandError> {
    let n = arch.islands.len();
    if n < 2 {
        return Ok(MigrationOutcome::NoNeighbours);
    }
    if (generation as f64) < cfg.warmup_fraction * total_generations as f64 {
        return Ok(MigrationOutcome::NotWarm);
    }
    let mut outgoing = Vec::with_capacity(n);
    let mut worst = Vec::with_capacity(n);
    for island in &arch.islands {
        if cfg.migration_count >= island.len() {
            return Err(IslandError::InvalidConfig(alloc::format!(
                "migration_count {} must be below the island size {}",
                cfg.migration_count,
                island.len()
            )));
        }
        let order = island.ranking()?;
        let sent: Vec<_> = order[..cfg.migration_count]
            .iter()
            .map(|&i| island.candidates()[i].clone())
            .collect();
        outgoing.push(sent);
        worst.push(order[order.len() - cfg.migration_count..].to_vec());
    }
    for (source, migrants) in outgoing.into_iter().enumerate() {
        let dest = (source + 1) % n;
        // Worst-ranked slot receives the best migrant last; order is irrelevant
        // for correctness but fixed for determinism.
        for (slot, migrant) in worst[dest].iter().zip(migrants) {
            arch.islands[dest].replace(*slot, migrant);
        }
    }
    Ok(MigrationOutcome::Migrated)
}

/// Advances every island one generation with its own stream, evaluates the
/// new populations, then migrates when the new generation number is a
/// multiple of the migration interval.
pub fn step_archipelago<E: Evaluator + ?Sized>(
    arch: &mut Archipelago,
    evo_cfg: &EvolutionConfig,
    island_cfg: &IslandConfig,
    evaluator: &E,
) -> Result<Option<MigrationOutcome>, IslandError> {
    for (island, lineage) in arch.islands.iter_mut().zip(&arch.lineages) {
        let mut rng = lineage.generation(island.generation());
        let mut next = evolve_generation(island, evo_cfg, &mut rng)?;
        evaluator.evaluate_population(&mut next)?;
        *island = next;
    }
    let generation = arch.generation();
    if island_cfg.enabled && arch.islands.len() > 1 && generation.is_multiple_of(island_cfg.migration_interval) {
        return migrate(arch, island_cfg, generation, evo_cfg.generations).map(Some);
    }
    Ok(None)
}
