//! Fitness evaluation: the evaluator contract, the subset history cache with
//! warm-start keys, and batch dispatch shared by both search stages.

mod cache;
pub mod conformance;
pub mod external;
mod linear;
mod planted;
pub mod protocol;
mod subset;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorio::Dataset;

pub use cache::{CacheStats, SubsetCache};
pub use external::{external_evaluate, ExternalEvaluator, PluginClient, PluginCommand, Timeouts};
pub use linear::{linear_probe_fitness, log_variance_features, LinearProbeEvaluator};
pub use planted::{jaccard, planted_fitness, PlantedEvaluator};
pub use protocol::ProtocolError;
pub use subset::ChannelSubset;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("degenerate features: {0}")]
    DegenerateFeatures(String),
    #[error("evaluator returned score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("evaluator failure: {0}")]
    EvaluatorFailure(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// One evaluation result as stored in the subset history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub score: f64,
    pub state_key: Option<String>,
    /// True when no history existed for the subset, i.e. training started cold.
    pub fresh: bool,
}

/// Data handed to evaluators. In-memory datasets serve in-process
/// evaluators; file paths serve external plugins.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub universe_size: usize,
    pub train: Option<Dataset>,
    pub valid: Option<Dataset>,
    pub train_path: Option<PathBuf>,
    pub valid_path: Option<PathBuf>,
}

impl EvalContext {
    /// A context with no data, for synthetic evaluators.
    pub fn synthetic(universe_size: usize) -> Self {
        Self {
            universe_size,
            ..Self::default()
        }
    }

    pub fn from_datasets(train: Dataset, valid: Dataset) -> Self {
        Self {
            universe_size: train.n_channels(),
            train: Some(train),
            valid: Some(valid),
            ..Self::default()
        }
    }

    pub fn with_paths(mut self, train: PathBuf, valid: PathBuf) -> Self {
        self.train_path = Some(train);
        self.valid_path = Some(valid);
        self
    }
}

/// What an evaluator sees for one call.
#[derive(Debug, Clone, Copy)]
pub struct EvalRequest<'a> {
    pub subset: &'a ChannelSubset,
    /// State key from the latest cached record, if the subset was seen before.
    pub warm_key: Option<&'a str>,
    /// Number of earlier records for this subset.
    pub attempt: usize,
    pub ctx: &'a EvalContext,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub score: f64,
    pub state_key: Option<String>,
}

pub trait Evaluator: Send + Sync {
    fn name(&self) -> String;

    /// A deterministic evaluator returns the same score for the same subset
    /// every time, so cache hits can skip the call entirely.
    fn is_deterministic(&self) -> bool {
        false
    }

    fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn name(&self) -> String {
        (**self).name()
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
        (**self).evaluate(req)
    }
}

/// Adapts a closure `Fn(&ChannelSubset) -> f64` into a deterministic evaluator.
pub struct FnEvaluator<F> {
    name: String,
    f: F,
}

impl<F> FnEvaluator<F>
where
    F: Fn(&ChannelSubset) -> f64 + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            name: name.into(),
            f,
        }
    }
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: Fn(&ChannelSubset) -> f64 + Send + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
        Ok(EvalOutcome {
            score: (self.f)(req.subset),
            state_key: None,
        })
    }
}

/// Evaluates one subset through the cache.
///
/// A cached subset is re-evaluated with its stored state key (warm start),
/// except for deterministic evaluators, whose cached score is reused as is.
pub fn evaluate(
    ev: &dyn Evaluator,
    s: &ChannelSubset,
    ctx: &EvalContext,
    cache: &SubsetCache,
) -> Result<FitnessRecord, EvalError> {
    if s.universe_size() != ctx.universe_size {
        return Err(EvalError::InvalidSubset(format!(
            "subset over {} channels, context has {}",
            s.universe_size(),
            ctx.universe_size
        )));
    }
    if s.is_empty() {
        return Err(EvalError::InvalidSubset("empty subset".into()));
    }

    let prior = cache.latest(s);
    let record = match prior {
        Some(prev) if ev.is_deterministic() => FitnessRecord {
            score: prev.score,
            state_key: prev.state_key,
            fresh: false,
        },
        _ => {
            let attempt = cache.history_len(s);
            let warm_key = prior.as_ref().and_then(|p| p.state_key.as_deref());
            cache.note_invocation();
            let out = ev.evaluate(&EvalRequest {
                subset: s,
                warm_key,
                attempt,
                ctx,
            })?;
            if !(0.0..=1.0).contains(&out.score) {
                return Err(EvalError::ScoreOutOfRange(out.score));
            }
            FitnessRecord {
                score: out.score,
                // A plugin that drops the key keeps the previous one usable.
                state_key: out
                    .state_key
                    .or_else(|| prior.as_ref().and_then(|p| p.state_key.clone())),
                fresh: prior.is_none(),
            }
        }
    };
    cache.insert(s.clone(), record.clone());
    Ok(record)
}

/// Bundles an evaluator with its data, cache and worker pool.
pub struct EvalEngine<'a> {
    evaluator: &'a dyn Evaluator,
    ctx: &'a EvalContext,
    cache: &'a SubsetCache,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> EvalEngine<'a> {
    pub fn new(
        evaluator: &'a dyn Evaluator,
        ctx: &'a EvalContext,
        cache: &'a SubsetCache,
        threads: usize,
    ) -> Result<Self, EvalError> {
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| EvalError::EvaluatorFailure(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            evaluator,
            ctx,
            cache,
            pool,
        })
    }

    pub fn evaluator(&self) -> &dyn Evaluator {
        self.evaluator
    }

    pub fn ctx(&self) -> &EvalContext {
        self.ctx
    }

    pub fn cache(&self) -> &SubsetCache {
        self.cache
    }

    pub fn universe_size(&self) -> usize {
        self.ctx.universe_size
    }

    pub fn evaluate(&self, s: &ChannelSubset) -> Result<FitnessRecord, EvalError> {
        evaluate(self.evaluator, s, self.ctx, self.cache)
    }

    /// Evaluates a batch, returning records in input order.
    ///
    /// Each distinct subset is evaluated once per batch; repeats within the
    /// batch share that record. Distinct subsets never race on the cache, so
    /// results do not depend on the number of workers.
    pub fn evaluate_batch(
        &self,
        subsets: &[ChannelSubset],
    ) -> Result<Vec<FitnessRecord>, EvalError> {
        let mut distinct: Vec<&ChannelSubset> = Vec::new();
        let mut slot = Vec::with_capacity(subsets.len());
        let mut seen = std::collections::HashMap::new();
        for s in subsets {
            let idx = *seen.entry(s).or_insert_with(|| {
                distinct.push(s);
                distinct.len() - 1
            });
            slot.push(idx);
        }

        let run = || -> Result<Vec<FitnessRecord>, EvalError> {
            distinct.par_iter().map(|s| self.evaluate(s)).collect()
        };
        let results = match &self.pool {
            Some(pool) => pool.install(run)?,
            None => distinct
                .iter()
                .map(|s| self.evaluate(s))
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(slot.into_iter().map(|i| results[i].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        calls: AtomicUsize,
        deterministic: bool,
    }

    impl Evaluator for Counting {
        fn name(&self) -> String {
            "counting".into()
        }
        fn is_deterministic(&self) -> bool {
            self.deterministic
        }
        fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(EvalOutcome {
                score: req.subset.len() as f64 / req.subset.universe_size() as f64,
                state_key: Some(format!("k{n}")),
            })
        }
    }

    #[test]
    fn repeat_call_hits_cache() {
        let ev = Counting {
            calls: AtomicUsize::new(0),
            deterministic: true,
        };
        let ctx = EvalContext::synthetic(8);
        let cache = SubsetCache::new();
        let s = ChannelSubset::new([1, 2], 8).unwrap();
        let a = evaluate(&ev, &s, &ctx, &cache).unwrap();
        let b = evaluate(&ev, &ChannelSubset::new([2, 1], 8).unwrap(), &ctx, &cache).unwrap();
        assert!(a.fresh);
        assert!(!b.fresh);
        assert_eq!(a.score, b.score);
        assert_eq!(ev.calls.load(Ordering::SeqCst), 1);
        assert_eq!(cache.stats().fresh, 1);
    }

    #[test]
    fn stochastic_hit_passes_warm_key() {
        struct Echo;
        impl Evaluator for Echo {
            fn name(&self) -> String {
                "echo".into()
            }
            fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
                Ok(EvalOutcome {
                    score: 0.5,
                    state_key: Some(format!("{}+", req.warm_key.unwrap_or("cold"))),
                })
            }
        }
        let ctx = EvalContext::synthetic(4);
        let cache = SubsetCache::new();
        let s = ChannelSubset::new([0], 4).unwrap();
        evaluate(&Echo, &s, &ctx, &cache).unwrap();
        let second = evaluate(&Echo, &s, &ctx, &cache).unwrap();
        assert_eq!(second.state_key.as_deref(), Some("cold++"));
        assert!(!second.fresh);
        let hist = cache.history(&s);
        assert_eq!(hist.len(), 2);
        assert_eq!(hist[0].state_key.as_deref(), Some("cold++"));
    }

    #[test]
    fn out_of_universe_subset_rejected() {
        let ev = Counting {
            calls: AtomicUsize::new(0),
            deterministic: true,
        };
        let ctx = EvalContext::synthetic(4);
        let cache = SubsetCache::new();
        assert!(ChannelSubset::new([4], 4).is_err());
        let other = ChannelSubset::new([4], 5).unwrap();
        assert!(matches!(
            evaluate(&ev, &other, &ctx, &cache),
            Err(EvalError::InvalidSubset(_))
        ));
        assert!(matches!(
            evaluate(&ev, &ChannelSubset::empty(4), &ctx, &cache),
            Err(EvalError::InvalidSubset(_))
        ));
    }

    #[test]
    fn out_of_range_score_rejected() {
        let ev = FnEvaluator::new("bad", |_s: &ChannelSubset| 1.3);
        let ctx = EvalContext::synthetic(3);
        let cache = SubsetCache::new();
        let s = ChannelSubset::new([0], 3).unwrap();
        assert!(matches!(
            evaluate(&ev, &s, &ctx, &cache),
            Err(EvalError::ScoreOutOfRange(_))
        ));
        assert!(cache.latest(&s).is_none());
    }

    #[test]
    fn batch_dedupes_and_preserves_order() {
        let ev = Counting {
            calls: AtomicUsize::new(0),
            deterministic: false,
        };
        let ctx = EvalContext::synthetic(6);
        let cache = SubsetCache::new();
        let a = ChannelSubset::new([0], 6).unwrap();
        let b = ChannelSubset::new([0, 1, 2], 6).unwrap();
        let engine = EvalEngine::new(&ev, &ctx, &cache, 4).unwrap();
        let out = engine
            .evaluate_batch(&[a.clone(), b.clone(), a.clone()])
            .unwrap();
        assert_eq!(ev.calls.load(Ordering::SeqCst), 2);
        assert_eq!(out[0], out[2]);
        assert_eq!(out[1].score, 0.5);
        assert_eq!(cache.stats().fresh, 2);
    }
}
