//! Run reports and their canonical JSON form (sorted keys, schema versioned).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dgaff::GenerationStats;
use crate::evaluator::{CacheStats, ChannelSubset};
use crate::hics::HicsTrace;
use crate::pipeline::RunConfig;
use crate::subsetselect::{SelectionTally, TallyEntry};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How often each channel appears across a set of selected subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelHistogram {
    pub runs: usize,
    pub counts: Vec<usize>,
}

impl ChannelHistogram {
    pub fn new(universe_size: usize) -> Self {
        Self {
            runs: 0,
            counts: vec![0; universe_size],
        }
    }

    pub fn from_subsets<'a, I>(universe_size: usize, subsets: I) -> Self
    where
        I: IntoIterator<Item = &'a ChannelSubset>,
    {
        let mut h = Self::new(universe_size);
        for s in subsets {
            h.add(s);
        }
        h
    }

    pub fn add(&mut self, s: &ChannelSubset) {
        self.runs += 1;
        for &m in s.members() {
            self.counts[m] += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HicsSummary {
    pub subset: ChannelSubset,
    pub trace: HicsTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyRow {
    pub subset: ChannelSubset,
    pub repetitions: usize,
    pub r_hat: f64,
    pub fitness: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyReport {
    pub gamma: f64,
    pub population_size: usize,
    pub rows: Vec<TallyRow>,
}

impl TallyReport {
    pub fn new(t: &SelectionTally, gamma: f64) -> Self {
        Self {
            gamma,
            population_size: t.population_size,
            rows: t
                .entries
                .iter()
                .map(|e| TallyRow {
                    subset: e.subset.clone(),
                    repetitions: e.repetitions,
                    r_hat: e.r_hat,
                    fitness: e.fitness,
                    score: e.score(gamma),
                })
                .collect(),
        }
    }

    pub fn to_tally(&self) -> SelectionTally {
        SelectionTally {
            population_size: self.population_size,
            entries: self
                .rows
                .iter()
                .map(|r| TallyEntry {
                    subset: r.subset.clone(),
                    repetitions: r.repetitions,
                    r_hat: r.r_hat,
                    fitness: r.fitness,
                })
                .collect(),
        }
    }
}

/// Non-reproducible facts about a run: worker count and wall-clock times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionInfo {
    pub threads: usize,
    pub stage_seconds: BTreeMap<String, f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub evaluator: String,
    pub universe_size: usize,
    pub hics: Option<HicsSummary>,
    pub weights: Option<Vec<f64>>,
    pub generations: Vec<GenerationStats>,
    pub tally: Option<TallyReport>,
    pub selected: ChannelSubset,
    pub final_score: f64,
    pub histogram: ChannelHistogram,
    pub eval_stats: CacheStats,
    pub execution: ExecutionInfo,
}

/// Serializes any value as pretty JSON with keys sorted at every level.
pub fn canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json's Map is ordered by key unless `preserve_order` is enabled.
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

impl RunReport {
    pub fn to_json(&self) -> String {
        canonical_json(self).expect("reports always serialize")
    }

    /// Canonical JSON without the `execution` section; byte-identical for
    /// runs with the same configuration and seed.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports always serialize");
        if let Value::Object(map) = &mut v {
            map.remove("execution");
        }
        canonical_json(&v).expect("values always serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

pub fn emit_report<T: Serialize>(r: &T, path: impl AsRef<Path>) -> std::io::Result<()> {
    let json = canonical_json(r).map_err(std::io::Error::other)?;
    fs::write(path, json)
}

pub fn read_report(path: impl AsRef<Path>) -> std::io::Result<RunReport> {
    let s = fs::read_to_string(path)?;
    RunReport::from_json(&s).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

/// Human-readable summary used by `inspect`.
pub fn render_summary(r: &RunReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "mode:        {}", r.config.mode);
    let _ = writeln!(out, "evaluator:   {}", r.evaluator);
    let _ = writeln!(out, "channels:    {} (K = {})", r.universe_size, r.config.k);
    let _ = writeln!(out, "selected:    {:?}", r.selected.members());
    let _ = writeln!(out, "final score: {:.4}", r.final_score);
    if let Some(h) = &r.hics {
        let _ = writeln!(out, "greedy:      {:?}", h.subset.members());
        for l in &h.trace.levels {
            let _ = writeln!(
                out,
                "  level {:>2}: +{:<3} fitness {:.4} ({} candidates)",
                l.level,
                l.chosen,
                l.chosen_fitness,
                l.candidates.len()
            );
        }
    }
    if !r.generations.is_empty() {
        let _ = writeln!(out, "generations:");
        for g in &r.generations {
            let _ = writeln!(
                out,
                "  {:>3}: best {:.4} mean {:.4} {:?}",
                g.generation,
                g.best_fitness,
                g.mean_fitness,
                g.best_subset.members()
            );
        }
    }
    if let Some(t) = &r.tally {
        let _ = writeln!(out, "final tally (gamma = {}):", t.gamma);
        for row in &t.rows {
            let _ = writeln!(
                out,
                "  {:?} r={} r_hat={:.4} y={:.4} score={:.4}",
                row.subset.members(),
                row.repetitions,
                row.r_hat,
                row.fitness,
                row.score
            );
        }
    }
    let _ = writeln!(
        out,
        "evaluations: {} distinct, {} fresh, {} cached, {} evaluator calls",
        r.eval_stats.distinct, r.eval_stats.fresh, r.eval_stats.cached, r.eval_stats.invocations
    );
    let _ = writeln!(out, "histogram:   {:?}", r.histogram.counts);
    out
}
