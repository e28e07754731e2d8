//! Final subset choice from the last population: each unique subset is
//! scored `gamma * r_hat + (1 - gamma) * y`, where `r_hat` is its share of the
//! population and `y` its fitness.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dgaff::Population;
use crate::error::SearchError;
use crate::evaluator::ChannelSubset;

pub const DEFAULT_GAMMA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaConfig {
    pub gamma: f64,
}

impl GammaConfig {
    pub fn new(gamma: f64) -> Result<Self, SearchError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(SearchError::InvalidConfig(format!(
                "gamma = {gamma} must lie in [0, 1]"
            )));
        }
        Ok(Self { gamma })
    }
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyEntry {
    pub subset: ChannelSubset,
    pub repetitions: usize,
    pub r_hat: f64,
    pub fitness: f64,
}

impl TallyEntry {
    pub fn score(&self, gamma: f64) -> f64 {
        gamma * self.r_hat + (1.0 - gamma) * self.fitness
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTally {
    pub population_size: usize,
    pub entries: Vec<TallyEntry>,
}

/// One entry per distinct subset, sorted by canonical order.
///
/// If copies of one subset carry different fitness values, the value of the
/// last copy wins (populations carry the latest cached score anyway).
pub fn tally_unique(p: &Population) -> SelectionTally {
    let n = p.len();
    let mut groups: BTreeMap<ChannelSubset, (usize, f64)> = BTreeMap::new();
    for (c, &y) in p.individuals.iter().zip(&p.fitness) {
        let e = groups.entry(c.to_subset()).or_insert((0, y));
        e.0 += 1;
        e.1 = y;
    }
    let entries = groups
        .into_iter()
        .map(|(subset, (r, y))| {
            debug_assert!((0.0..=1.0).contains(&y));
            TallyEntry {
                subset,
                repetitions: r,
                r_hat: r as f64 / n as f64,
                fitness: y,
            }
        })
        .collect();
    SelectionTally {
        population_size: n,
        entries,
    }
}

fn rank(a: &TallyEntry, b: &TallyEntry, gamma: f64) -> Ordering {
    // Greater is better: higher score, then higher fitness, then lower subset.
    a.score(gamma)
        .total_cmp(&b.score(gamma))
        .then(a.fitness.total_cmp(&b.fitness))
        .then_with(|| b.subset.cmp(&a.subset))
}

pub fn select_final(t: &SelectionTally, g: &GammaConfig) -> Result<ChannelSubset, SearchError> {
    select_final_with_cardinality(t, g, None)
}

/// Like [`select_final`], but only entries with exactly `k` channels compete
/// when `k` is given. `r_hat` keeps its whole-population denominator.
pub fn select_final_with_cardinality(
    t: &SelectionTally,
    g: &GammaConfig,
    k: Option<usize>,
) -> Result<ChannelSubset, SearchError> {
    t.entries
        .iter()
        .filter(|e| k.is_none_or(|k| e.subset.len() == k))
        .max_by(|a, b| rank(a, b, g.gamma))
        .map(|e| e.subset.clone())
        .ok_or(SearchError::EmptyTally)
}
