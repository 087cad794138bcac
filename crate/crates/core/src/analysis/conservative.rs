use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automaton::HybridAutomaton;
use crate::error::Result;
use crate::traces::{accepts_eps, random_walk, ObservableTrace, WalkConfig};

/// A sampled walk of the reference rejected by the checked automaton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: usize,
    pub seed: u64,
    pub trace: ObservableTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservativeReport {
    pub note: String,
    pub samples: usize,
    pub seed: u64,
    pub walk: WalkConfig,
    pub eps: f64,
    /// Sorted by walk index.
    pub counterexamples: Vec<Counterexample>,
}

pub const SAMPLING_NOTE: &str =
    "sampled check: a counterexample refutes language inclusion; no counterexample does not prove it";

impl ConservativeReport {
    pub fn refuted(&self) -> bool {
        !self.counterexamples.is_empty()
    }
}

/// Draws `samples` random walks of `reference` (walk `i` uses seed
/// `seed + i`) and collects those whose observable trace `built` rejects.
pub fn conservative_check(
    built: &HybridAutomaton,
    reference: &HybridAutomaton,
    samples: usize,
    seed: u64,
    walk: &WalkConfig,
    eps: f64,
) -> Result<ConservativeReport> {
    let found: Vec<Option<Counterexample>> = (0..samples)
        .into_par_iter()
        .map(|index| {
            let s = seed.wrapping_add(index as u64);
            let t = random_walk(reference, walk, s)?;
            Ok(accepts_eps(built, &t.trace, eps).is_none().then(|| Counterexample {
                index,
                seed: s,
                trace: t.trace,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(ConservativeReport {
        note: SAMPLING_NOTE.to_owned(),
        samples,
        seed,
        walk: *walk,
        eps,
        counterexamples: found.into_iter().flatten().collect(),
    })
}

/// Walks sampled from each automaton and rejected by the other, as
/// `(a rejects walks of b, b rejects walks of a)`.
pub fn membership_discrepancies(
    a: &HybridAutomaton,
    b: &HybridAutomaton,
    samples: usize,
    seed: u64,
    walk: &WalkConfig,
) -> Result<(ConservativeReport, ConservativeReport)> {
    Ok((
        conservative_check(a, b, samples, seed, walk, 0.0)?,
        conservative_check(b, a, samples, seed, walk, 0.0)?,
    ))
}
