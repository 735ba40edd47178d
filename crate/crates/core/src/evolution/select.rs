//! Tournament selection.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use super::{EvolutionError, Population};

/// Orders two evaluated candidates: higher composite first, then lower
/// depth, then earlier index. `Less` means `a` ranks ahead of `b`.
pub(crate) fn rank(pop: &Population, a: usize, b: usize) -> Result<Ordering, EvolutionError> {
    let ra = pop.report(a)?;
    let rb = pop.report(b)?;
    Ok(rb
        .composite
        .partial_cmp(&ra.composite)
        .unwrap_or(Ordering::Equal)
        .then(ra.depth.cmp(&rb.depth))
        .then(a.cmp(&b)))
}

/// Winner of one tournament over `entrants`, or an error if any entrant is
/// unevaluated.
pub(crate) fn tournament_among<R: Rng + ?Sized>(
    pop: &Population,
    entrants: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<usize, EvolutionError> {
    if k == 0 || k > entrants.len() {
        return Err(EvolutionError::InvalidConfig(alloc::format!(
            "tournament size {k} outside 1..={}",
            entrants.len()
        )));
    }
    let sample = rand::seq::index::sample(rng, entrants.len(), k);
    let mut best = entrants[sample.index(0)];
    for pos in sample.iter().skip(1) {
        let challenger = entrants[pos];
        if rank(pop, challenger, best)? == Ordering::Less {
            best = challenger;
        }
    }
    // Validate the winner even when k == 1.
    pop.report(best)?;
    Ok(best)
}

/// Samples `k` candidates uniformly without replacement and returns the
/// index of the best one.
pub fn tournament_select<R: Rng + ?Sized>(pop: &Population, k: usize, rng: &mut R) -> Result<usize, EvolutionError> {
    let all: Vec<usize> = (0..pop.len()).collect();
    tournament_among(pop, &all, k, rng)
}

/// Picks `count` distinct candidates by repeated tournaments over the
/// not-yet-chosen ones. With `k` at least the population size this is
/// exact top-`count` selection.
pub fn select_elites<R: Rng + ?Sized>(
    pop: &Population,
    count: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>, EvolutionError> {
    let mut remaining: Vec<usize> = (0..pop.len()).collect();
    let mut chosen = Vec::with_capacity(count);
    while chosen.len() < count && !remaining.is_empty() {
        let winner = tournament_among(pop, &remaining, k.min(remaining.len()), rng)?;
        remaining.retain(|&i| i != winner);
        chosen.push(winner);
    }
    Ok(chosen)
}
