//! The change, delete, add and swap mutations, their combinations, and the
//! adaptive rate schedule.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use super::init::random_operation;
use super::{DepthBounds, EvolutionError, Population};
use crate::circuit::{Circuit, Operation};
use crate::gate::GateId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Change,
    Delete,
    Add,
    Swap,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Change, Strategy::Delete, Strategy::Add, Strategy::Swap];

    const fn bit(self) -> u8 {
        match self {
            Strategy::Change => 1,
            Strategy::Delete => 2,
            Strategy::Add => 4,
            Strategy::Swap => 8,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Strategy::Change => "change",
            Strategy::Delete => "delete",
            Strategy::Add => "add",
            Strategy::Swap => "swap",
        }
    }
}

impl FromStr for Strategy {
    type Err = EvolutionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "change" | "ch" => Ok(Strategy::Change),
            "delete" | "del" | "deletion" => Ok(Strategy::Delete),
            "add" | "addition" => Ok(Strategy::Add),
            "swap" | "sw" => Ok(Strategy::Swap),
            other => Err(EvolutionError::InvalidConfig(alloc::format!(
                "unknown mutation strategy `{other}`"
            ))),
        }
    }
}

/// A non-empty subset of the four strategies, stored as a bitmask
/// (change = 1, delete = 2, add = 4, swap = 8).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategySet(u8);

impl StrategySet {
    pub fn new(strategies: &[Strategy]) -> Result<Self, EvolutionError> {
        let bits = strategies.iter().fold(0, |acc, s| acc | s.bit());
        Self::from_bits(bits)
    }

    pub fn from_bits(bits: u8) -> Result<Self, EvolutionError> {
        if bits == 0 || bits > 15 {
            return Err(EvolutionError::InvalidConfig(alloc::format!(
                "strategy bitmask {bits} is not a non-empty subset"
            )));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, s: Strategy) -> bool {
        self.0 & s.bit() != 0
    }

    /// Members in canonical order.
    pub fn members(self) -> Vec<Strategy> {
        Strategy::ALL.into_iter().filter(|&s| self.contains(s)).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// All 15 non-empty subsets in bitmask order.
    pub fn all() -> impl Iterator<Item = StrategySet> {
        (1..=15).map(StrategySet)
    }

    /// Members joined by `+`, e.g. `delete+swap`.
    pub fn label(self) -> String {
        let names: Vec<&str> = self.members().into_iter().map(Strategy::name).collect();
        names.join("+")
    }
}

impl fmt::Debug for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StrategySet({})", self.label())
    }
}

impl fmt::Display for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for StrategySet {
    type Err = EvolutionError;

    /// Parses `swap+delete` (also accepts `,` or `|` as separators).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let members = s
            .split(['+', ',', '|'])
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Strategy>, _>>()?;
        StrategySet::new(&members)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MutationConfig {
    pub strategies: StrategySet,
    /// Per-candidate probability of being mutated.
    pub rate: f64,
    /// Number of operators applied to a mutated candidate.
    pub mutations_per_candidate: usize,
    pub adaptive: bool,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            strategies: StrategySet(Strategy::Delete.bit() | Strategy::Swap.bit()),
            rate: 0.25,
            mutations_per_candidate: 1,
            adaptive: false,
            alpha: 0.5,
            beta: 0.3,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: &str| Err(EvolutionError::InvalidConfig(m.into()));
        if !(0.0..=1.0).contains(&self.rate) {
            return bad("mutation rate must lie in [0, 1]");
        }
        if self.mutations_per_candidate == 0 {
            return bad("mutations_per_candidate must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("adaptive alpha must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("adaptive beta must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Replaces one uniformly chosen operation by a different gate of the same
/// arity on the same wires. CNOT, the only two-qubit gate, is replaced by
/// its control/target flip. Depth is unchanged.
pub fn mutate_change<R: Rng + ?Sized>(circuit: &mut Circuit, rng: &mut R) -> bool {
    if circuit.is_empty() {
        return false;
    }
    let index = rng.gen_range(0..circuit.len());
    let op = circuit.ops()[index];
    let replacement = match op.gate().arity() {
        1 => {
            let pool = GateId::SINGLE_QUBIT;
            let current = pool.iter().position(|&g| g == op.gate()).expect("single-qubit gate");
            let mut pick = rng.gen_range(0..pool.len() - 1);
            if pick >= current {
                pick += 1;
            }
            op.with_gate(pool[pick])
        }
        _ => op.flipped(),
    };
    circuit.replace(index, replacement).expect("same wires stay valid");
    true
}

/// Removes one uniformly chosen operation unless the genome is at its
/// minimum depth.
pub fn mutate_delete<R: Rng + ?Sized>(circuit: &mut Circuit, bounds: DepthBounds, rng: &mut R) -> bool {
    if circuit.len() <= bounds.min || circuit.is_empty() {
        log::trace!("delete skipped at minimum depth {}", bounds.min);
        return false;
    }
    let index = rng.gen_range(0..circuit.len());
    circuit.remove(index);
    true
}

/// Inserts a fresh random operation at a uniform position in `[0, len]`
/// unless the genome is at its maximum depth.
pub fn mutate_add<R: Rng + ?Sized>(circuit: &mut Circuit, bounds: DepthBounds, rng: &mut R) -> bool {
    if circuit.len() >= bounds.max {
        log::trace!("add skipped at maximum depth {}", bounds.max);
        return false;
    }
    let op = random_operation(circuit.n_qubits(), rng);
    let index = rng.gen_range(0..=circuit.len());
    circuit.insert(index, op).expect("random operations are valid");
    true
}

/// Exchanges the operations at two distinct uniformly chosen positions.
pub fn mutate_swap<R: Rng + ?Sized>(circuit: &mut Circuit, rng: &mut R) -> bool {
    if circuit.len() < 2 {
        log::trace!("swap skipped on a genome shorter than 2");
        return false;
    }
    let a = rng.gen_range(0..circuit.len());
    let mut b = rng.gen_range(0..circuit.len() - 1);
    if b >= a {
        b += 1;
    }
    circuit.swap(a, b);
    true
}

pub fn apply_strategy<R: Rng + ?Sized>(
    strategy: Strategy,
    circuit: &mut Circuit,
    bounds: DepthBounds,
    rng: &mut R,
) -> bool {
    match strategy {
        Strategy::Change => mutate_change(circuit, rng),
        Strategy::Delete => mutate_delete(circuit, bounds, rng),
        Strategy::Add => mutate_add(circuit, bounds, rng),
        Strategy::Swap => mutate_swap(circuit, rng),
    }
}

/// With probability `rate`, applies `mutations_per_candidate` operators,
/// each drawn uniformly from the enabled strategies. Returns whether the
/// candidate was selected for mutation.
pub fn apply_mutations<R: Rng + ?Sized>(
    circuit: &mut Circuit,
    mc: &MutationConfig,
    rate: f64,
    bounds: DepthBounds,
    rng: &mut R,
) -> bool {
    if !(rng.gen::<f64>() < rate) {
        return false;
    }
    let members = mc.strategies.members();
    for _ in 0..mc.mutations_per_candidate {
        let strategy = members[rng.gen_range(0..members.len())];
        apply_strategy(strategy, circuit, bounds, rng);
    }
    true
}

/// Effective mutation rate under the adaptive schedule:
///
/// `rate · (1 + alpha·(1 − diversity)) · (beta + (1 − beta)·(1 − gen/total))`,
/// clamped to [0, 1]. Low diversity raises the rate; progress through the
/// run lowers it towards `beta · rate`.
pub fn adaptive_rate(
    mc: &MutationConfig,
    diversity: f64,
    generation: usize,
    total_generations: usize,
) -> Result<f64, EvolutionError> {
    if !(0.0..=1.0).contains(&diversity) {
        return Err(EvolutionError::InvalidDiversity(diversity));
    }
    let progress = if total_generations == 0 {
        1.0
    } else {
        (generation as f64 / total_generations as f64).min(1.0)
    };
    let boost = 1.0 + mc.alpha * (1.0 - diversity);
    let decay = mc.beta + (1.0 - mc.beta) * (1.0 - progress);
    Ok((mc.rate * boost * decay).clamp(0.0, 1.0))
}

/// Levenshtein distance over (gate, wires) tokens divided by the longer
/// length; 0 for two empty genomes.
pub fn genome_distance(a: &[Operation], b: &[Operation]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = alloc::vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            row[j + 1] = sub.min(prev[j + 1] + 1).min(row[j] + 1);
        }
        core::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()] as f64 / longest as f64
}

/// Size of the candidate sample used by [`population_diversity`].
pub const DIVERSITY_SAMPLE: usize = 20;

/// Mean pairwise [`genome_distance`] over a random sample of up to
/// [`DIVERSITY_SAMPLE`] candidates. Zero for fewer than two candidates.
pub fn population_diversity<R: Rng + ?Sized>(pop: &Population, rng: &mut R) -> f64 {
    let n = pop.len();
    let picks = rand::seq::index::sample(rng, n, n.min(DIVERSITY_SAMPLE)).into_vec();
    if picks.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (k, &i) in picks.iter().enumerate() {
        for &j in &picks[k + 1..] {
            total += genome_distance(pop.candidates()[i].circuit.ops(), pop.candidates()[j].circuit.ops());
            pairs += 1;
        }
    }
    total / pairs as f64
}
