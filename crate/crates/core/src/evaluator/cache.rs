use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChannelSubset, FitnessRecord};

/// Content-addressed history of every subset evaluated during a run.
/// Entries are never evicted.
#[derive(Debug, Default)]
pub struct SubsetCache {
    // Oldest first internally; accessors present most-recent-first.
    entries: Mutex<HashMap<ChannelSubset, Vec<FitnessRecord>>>,
    fresh: AtomicUsize,
    hits: AtomicUsize,
    invocations: AtomicUsize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    /// Distinct subsets with at least one record.
    pub distinct: usize,
    /// Evaluations that started without history (cold trainings).
    pub fresh: usize,
    /// Evaluations of subsets already in the history.
    pub cached: usize,
    /// Calls that actually reached the evaluator.
    pub invocations: usize,
}

impl SubsetCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn latest(&self, s: &ChannelSubset) -> Option<FitnessRecord> {
        self.entries
            .lock()
            .unwrap()
            .get(s)
            .and_then(|h| h.last().cloned())
    }

    /// All records for `s`, most recent first.
    pub fn history(&self, s: &ChannelSubset) -> Vec<FitnessRecord> {
        self.entries
            .lock()
            .unwrap()
            .get(s)
            .map(|h| h.iter().rev().cloned().collect())
            .unwrap_or_default()
    }

    pub fn history_len(&self, s: &ChannelSubset) -> usize {
        self.entries.lock().unwrap().get(s).map_or(0, Vec::len)
    }

    pub fn contains(&self, s: &ChannelSubset) -> bool {
        self.entries.lock().unwrap().contains_key(s)
    }

    pub fn insert(&self, s: ChannelSubset, record: FitnessRecord) {
        let mut map = self.entries.lock().unwrap();
        let history = map.entry(s).or_default();
        if history.is_empty() {
            self.fresh.fetch_add(1, Ordering::Relaxed);
        } else {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        history.push(record);
    }

    pub(crate) fn note_invocation(&self) {
        self.invocations.fetch_add(1, Ordering::Relaxed);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            distinct: self.len(),
            fresh: self.fresh.load(Ordering::Relaxed),
            cached: self.hits.load(Ordering::Relaxed),
            invocations: self.invocations.load(Ordering::Relaxed),
        }
    }

    /// Highest latest-score subset with exactly `k` members; ties go to the
    /// lowest canonical order.
    pub fn best_with_cardinality(&self, k: usize) -> Option<(ChannelSubset, f64)> {
        let map = self.entries.lock().unwrap();
        map.iter()
            .filter(|(s, _)| s.len() == k)
            .filter_map(|(s, h)| h.last().map(|r| (s, r.score)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, score)| (s.clone(), score))
    }

    /// Snapshot of (subset, latest record), sorted by subset.
    pub fn snapshot(&self) -> Vec<(ChannelSubset, FitnessRecord)> {
        let map = self.entries.lock().unwrap();
        let mut out: Vec<_> = map
            .iter()
            .filter_map(|(s, h)| h.last().map(|r| (s.clone(), r.clone())))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(score: f64) -> FitnessRecord {
        FitnessRecord {
            score,
            state_key: None,
            fresh: true,
        }
    }

    #[test]
    fn lookup_after_insert() {
        let c = SubsetCache::new();
        let s = ChannelSubset::new([3, 1], 5).unwrap();
        c.insert(s.clone(), rec(0.4));
        c.insert(s.clone(), rec(0.6));
        assert_eq!(c.latest(&s).unwrap().score, 0.6);
        let h: Vec<f64> = c.history(&s).iter().map(|r| r.score).collect();
        assert_eq!(h, vec![0.6, 0.4]);
        assert_eq!(c.stats().fresh, 1);
        assert_eq!(c.stats().cached, 1);
    }

    #[test]
    fn best_breaks_ties_by_canonical_order() {
        let c = SubsetCache::new();
        c.insert(ChannelSubset::new([2, 3], 5).unwrap(), rec(0.9));
        c.insert(ChannelSubset::new([0, 4], 5).unwrap(), rec(0.9));
        c.insert(ChannelSubset::new([1], 5).unwrap(), rec(1.0));
        let (s, score) = c.best_with_cardinality(2).unwrap();
        assert_eq!(s.members(), &[0, 4]);
        assert_eq!(score, 0.9);
    }
}
