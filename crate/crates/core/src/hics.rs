//! Hierarchical incremental channel selection: greedy forward search that
//! commits the best single-channel extension at every level.

use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::evaluator::{ChannelSubset, EvalEngine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HicsConfig {
    /// Channel count `K` of the whole pipeline; the greedy stage stops at `K - 1`.
    pub k_target: usize,
    pub universe_size: usize,
    /// Grow to all channels and keep the best subset of any size.
    #[serde(default)]
    pub full_sweep: bool,
}

impl HicsConfig {
    pub fn new(k_target: usize, universe_size: usize) -> Result<Self, SearchError> {
        if k_target == 0 || k_target > universe_size {
            return Err(SearchError::InvalidConfig(format!(
                "K = {k_target} must lie in [1, {universe_size}]"
            )));
        }
        Ok(Self {
            k_target,
            universe_size,
            full_sweep: false,
        })
    }

    pub fn with_full_sweep(mut self, on: bool) -> Self {
        self.full_sweep = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub channel: usize,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HicsLevel {
    /// 1-based level; the committed subset has `level` channels.
    pub level: usize,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    pub chosen_fitness: f64,
    pub subset: ChannelSubset,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HicsTrace {
    pub levels: Vec<HicsLevel>,
}

impl HicsTrace {
    pub fn evaluations(&self) -> usize {
        self.levels.iter().map(|l| l.candidates.len()).sum()
    }

    /// Best committed subset over all levels; the smaller subset wins ties.
    pub fn best_level(&self) -> Option<&HicsLevel> {
        self.levels
            .iter()
            .fold(None, |best: Option<&HicsLevel>, l| match best {
                Some(b) if b.chosen_fitness >= l.chosen_fitness => Some(b),
                _ => Some(l),
            })
    }
}

/// Grows a subset greedily for `levels` levels.
///
/// Candidates of a level are evaluated as one batch and reduced in ascending
/// channel order, so the lowest index wins ties regardless of worker count.
pub fn grow_greedy(levels: usize, engine: &EvalEngine<'_>) -> Result<HicsTrace, SearchError> {
    let c = engine.universe_size();
    if levels > c {
        return Err(SearchError::InvalidConfig(format!(
            "cannot grow to {levels} of {c} channels"
        )));
    }
    let mut current = ChannelSubset::empty(c);
    let mut pool: Vec<usize> = (0..c).collect();
    let mut trace = HicsTrace::default();

    for level in 1..=levels {
        let mut extensions = pool
            .iter()
            .map(|&ch| current.with(ch))
            .collect::<Result<Vec<_>, _>>()?;
        let records = engine.evaluate_batch(&extensions)?;

        let mut best = 0;
        for i in 1..records.len() {
            if records[i].score > records[best].score {
                best = i;
            }
        }
        let chosen = pool[best];
        trace.levels.push(HicsLevel {
            level,
            candidates: pool
                .iter()
                .zip(&records)
                .map(|(&channel, r)| Candidate {
                    channel,
                    fitness: r.score,
                })
                .collect(),
            chosen,
            chosen_fitness: records[best].score,
            subset: extensions[best].clone(),
        });
        current = extensions.swap_remove(best);
        pool.remove(best);
    }
    Ok(trace)
}

/// Runs the greedy stage to `K - 1` channels (or, in full-sweep mode, to all
/// channels keeping the best level).
pub fn run_hics(
    cfg: &HicsConfig,
    engine: &EvalEngine<'_>,
) -> Result<(ChannelSubset, HicsTrace), SearchError> {
    if cfg.universe_size != engine.universe_size() {
        return Err(SearchError::InvalidConfig(format!(
            "config has {} channels, data has {}",
            cfg.universe_size,
            engine.universe_size()
        )));
    }
    HicsConfig::new(cfg.k_target, cfg.universe_size)?;
    if cfg.full_sweep {
        let trace = grow_greedy(cfg.universe_size, engine)?;
        let best = trace
            .best_level()
            .map(|l| l.subset.clone())
            .unwrap_or_else(|| ChannelSubset::empty(cfg.universe_size));
        return Ok((best, trace));
    }
    let trace = grow_greedy(cfg.k_target - 1, engine)?;
    let subset = trace
        .levels
        .last()
        .map(|l| l.subset.clone())
        .unwrap_or_else(|| ChannelSubset::empty(cfg.universe_size));
    Ok((subset, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{EvalContext, FnEvaluator, SubsetCache};

    #[test]
    fn k_one_returns_empty() {
        let ev = FnEvaluator::new("len", |s: &ChannelSubset| s.len() as f64 / 5.0);
        let ctx = EvalContext::synthetic(5);
        let cache = SubsetCache::new();
        let engine = EvalEngine::new(&ev, &ctx, &cache, 1).unwrap();
        let (s, trace) = run_hics(&HicsConfig::new(1, 5).unwrap(), &engine).unwrap();
        assert!(s.is_empty());
        assert!(trace.levels.is_empty());
        assert_eq!(cache.stats().invocations, 0);
    }

    #[test]
    fn k_zero_rejected() {
        assert!(HicsConfig::new(0, 5).is_err());
        assert!(HicsConfig::new(6, 5).is_err());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let ev = FnEvaluator::new("flat", |_s: &ChannelSubset| 0.5);
        let ctx = EvalContext::synthetic(6);
        let cache = SubsetCache::new();
        let engine = EvalEngine::new(&ev, &ctx, &cache, 3).unwrap();
        let (s, trace) = run_hics(&HicsConfig::new(4, 6).unwrap(), &engine).unwrap();
        assert_eq!(s.members(), &[0, 1, 2]);
        let counts: Vec<usize> = trace.levels.iter().map(|l| l.candidates.len()).collect();
        assert_eq!(counts, vec![6, 5, 4]);
    }

    #[test]
    fn full_sweep_keeps_best_level() {
        // Peaks at two channels {2, 4}.
        let ev = FnEvaluator::new("peak", |s: &ChannelSubset| {
            let hits = s.members().iter().filter(|&&m| m == 2 || m == 4).count() as f64;
            (hits - 0.3 * (s.len() as f64 - hits)).max(0.0) / 2.0
        });
        let ctx = EvalContext::synthetic(6);
        let cache = SubsetCache::new();
        let engine = EvalEngine::new(&ev, &ctx, &cache, 1).unwrap();
        let cfg = HicsConfig::new(3, 6).unwrap().with_full_sweep(true);
        let (s, trace) = run_hics(&cfg, &engine).unwrap();
        assert_eq!(trace.levels.len(), 6);
        assert_eq!(s.members(), &[2, 4]);
    }
}
