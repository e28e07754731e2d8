//! End-to-end selection: preprocessing, greedy search, weight formation,
//! genetic search and final subset choice, plus the `apply` and `sweep`
//! drivers built on top of it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dgaff::{run_dgaff, DgaffResult, GaConfig, GenerationStats};
use crate::error::SearchError;
use crate::evaluator::external::Timeouts;
use crate::evaluator::{
    ChannelSubset, EvalContext, EvalEngine, EvalError, Evaluator, ExternalEvaluator,
    LinearProbeEvaluator, PlantedEvaluator, PluginCommand, SubsetCache,
};
use crate::hics::{grow_greedy, run_hics, HicsConfig};
use crate::preprocess::{
    normalize, reject_artifacts, split_train_valid, window_trials, NormSpec, PreprocessError,
    WindowSpec,
};
use crate::report::{
    ChannelHistogram, ExecutionInfo, HicsSummary, RunReport, TallyReport, REPORT_SCHEMA_VERSION,
};
use crate::rng::{SeedStreams, Stream};
use crate::subsetselect::{select_final_with_cardinality, tally_unique, GammaConfig};
use crate::tensorio::{load_dataset, save_dataset, Dataset, TensorError};
use crate::weightform::{build_weights, WeightError, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Combined,
    HicsOnly,
    DgaffOnly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Combined => "combined",
            Mode::HicsOnly => "hics-only",
            Mode::DgaffOnly => "dgaff-only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvaluatorSpec {
    Planted {
        planted: Vec<usize>,
        noise_sigma: f64,
    },
    Linear,
    External {
        command: String,
    },
}

impl EvaluatorSpec {
    /// Parses `planted`, `linear` or `external:<command>`.
    pub fn parse(s: &str, planted: Option<Vec<usize>>, noise_sigma: f64) -> Result<Self, String> {
        match s {
            "linear" => Ok(Self::Linear),
            "planted" => Ok(Self::Planted {
                planted: planted.ok_or("the planted evaluator needs --planted")?,
                noise_sigma,
            }),
            other => match other.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(Self::External {
                    command: cmd.trim().to_string(),
                }),
                _ => Err(format!(
                    "unknown evaluator {other:?}; expected planted, linear or external:<command>"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Training recordings; split into train/validation unless `valid` is set.
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    /// Channel count when no dataset is given (synthetic evaluators).
    pub channels: Option<usize>,
    pub window: Option<WindowSpec>,
    pub norm: NormSpec,
    pub valid_fraction: f64,
    pub k: usize,
    /// Greedy-channel bias; `None` outside combined mode.
    pub m: Option<f64>,
    pub ga: GaConfig,
    pub gamma: f64,
    pub evaluator: EvaluatorSpec,
    pub mode: Mode,
    pub hics_full_sweep: bool,
    pub seed: u64,
    /// Where split datasets are written for external plugins.
    pub work_dir: Option<PathBuf>,
    #[serde(skip)]
    pub threads: usize,
}

impl RunConfig {
    /// Defaults for a synthetic planted run over `channels` channels.
    pub fn planted(
        channels: usize,
        k: usize,
        planted: Vec<usize>,
        noise_sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            train: None,
            valid: None,
            channels: Some(channels),
            window: None,
            norm: NormSpec::default(),
            valid_fraction: 0.2,
            k,
            m: Some(crate::weightform::DEFAULT_M),
            ga: GaConfig::new(k, seed),
            gamma: crate::subsetselect::DEFAULT_GAMMA,
            evaluator: EvaluatorSpec::Planted {
                planted,
                noise_sigma,
            },
            mode: Mode::Combined,
            hics_full_sweep: false,
            seed,
            work_dir: None,
            threads: 1,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        if mode != Mode::Combined {
            self.m = None;
        } else if self.m.is_none() {
            self.m = Some(crate::weightform::DEFAULT_M);
        }
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg_err = |msg: String| Err(PipelineError::config(msg));
        if self.k == 0 {
            return cfg_err("K must be >= 1".into());
        }
        if self.ga.k_target != self.k {
            return cfg_err(format!(
                "GA cardinality {} differs from K = {}",
                self.ga.k_target, self.k
            ));
        }
        if self.ga.seed != self.seed {
            return cfg_err("GA seed must equal the run seed".into());
        }
        match (self.mode, self.m) {
            (Mode::Combined, None) => return cfg_err("combined mode needs a bias m".into()),
            (Mode::DgaffOnly, Some(_)) => {
                return cfg_err("dgaff-only mode uses uniform initialization; drop --m".into())
            }
            _ => {}
        }
        GammaConfig::new(self.gamma).map_err(|e| PipelineError::config(e.to_string()))?;
        if self.train.is_none() && self.channels.is_none() {
            return cfg_err("either a training dataset or --channels is required".into());
        }
        if !matches!(self.evaluator, EvaluatorSpec::Planted { .. }) && self.train.is_none() {
            return cfg_err("the linear and external evaluators need a training dataset".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Load,
    Preprocess,
    Evaluator,
    Hics,
    Weights,
    Dgaff,
    Select,
    FinalEvaluation,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Evaluator,
    Io,
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            stage,
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Stage::Config, ErrorKind::Config, message)
    }

    fn tensor(stage: Stage, e: TensorError) -> Self {
        Self::new(stage, ErrorKind::Io, e.to_string())
    }

    fn preprocess(e: PreprocessError) -> Self {
        Self::new(Stage::Preprocess, ErrorKind::Config, e.to_string())
    }

    fn weights(e: WeightError) -> Self {
        Self::new(Stage::Weights, ErrorKind::Config, e.to_string())
    }

    fn search(stage: Stage, e: SearchError) -> Self {
        let kind = match e {
            SearchError::Eval(_) => ErrorKind::Evaluator,
            _ => ErrorKind::Config,
        };
        Self::new(stage, kind, e.to_string())
    }

    fn eval(stage: Stage, e: EvalError) -> Self {
        Self::search(stage, SearchError::Eval(e))
    }

    /// Process exit code: 2 configuration, 3 evaluator/protocol, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Evaluator => 3,
            ErrorKind::Io => 4,
        }
    }
}

fn prepare(d: &Dataset, cfg: &RunConfig) -> Result<Dataset, PipelineError> {
    let d = reject_artifacts(d).map_err(PipelineError::preprocess)?;
    let d = match &cfg.window {
        Some(w) => window_trials(&d, w).map_err(PipelineError::preprocess)?,
        None => d,
    };
    normalize(&d, &cfg.norm).map_err(PipelineError::preprocess)
}

/// Loads, preprocesses and splits the data once; the validation set stays
/// fixed for every evaluation of the run.
pub fn prepare_context(cfg: &RunConfig) -> Result<EvalContext, PipelineError> {
    let Some(train_path) = &cfg.train else {
        let c = cfg.channels.expect("validated");
        return Ok(EvalContext::synthetic(c));
    };
    let raw = load_dataset(train_path).map_err(|e| PipelineError::tensor(Stage::Load, e))?;
    let prepared = prepare(&raw, cfg)?;
    let (train, valid) = match &cfg.valid {
        Some(p) => {
            let v = load_dataset(p).map_err(|e| PipelineError::tensor(Stage::Load, e))?;
            (prepared, prepare(&v, cfg)?)
        }
        None => {
            let seed = SeedStreams::new(cfg.seed).seed_for(Stream::Split);
            split_train_valid(&prepared, cfg.valid_fraction, seed)
                .map_err(PipelineError::preprocess)?
        }
    };
    if train.n_channels() != valid.n_channels() {
        return Err(PipelineError::new(
            Stage::Load,
            ErrorKind::Config,
            format!(
                "train has {} channels, validation {}",
                train.n_channels(),
                valid.n_channels()
            ),
        ));
    }
    if let Some(c) = cfg.channels {
        if c != train.n_channels() {
            return Err(PipelineError::config(format!(
                "--channels {c} disagrees with dataset ({} channels)",
                train.n_channels()
            )));
        }
    }
    let mut ctx = EvalContext::from_datasets(train, valid);
    if matches!(cfg.evaluator, EvaluatorSpec::External { .. }) {
        let dir = cfg.work_dir.clone().unwrap_or_else(|| {
            std::env::temp_dir().join(format!("chansel-{}", std::process::id()))
        });
        std::fs::create_dir_all(&dir)
            .map_err(|e| PipelineError::new(Stage::Preprocess, ErrorKind::Io, e.to_string()))?;
        let (tp, vp) = (dir.join("train.sft"), dir.join("valid.sft"));
        save_dataset(ctx.train.as_ref().unwrap(), &tp)
            .map_err(|e| PipelineError::tensor(Stage::Preprocess, e))?;
        save_dataset(ctx.valid.as_ref().unwrap(), &vp)
            .map_err(|e| PipelineError::tensor(Stage::Preprocess, e))?;
        ctx = ctx.with_paths(tp, vp);
    }
    Ok(ctx)
}

/// Instantiates the configured evaluator for a prepared context.
pub fn build_evaluator(
    cfg: &RunConfig,
    ctx: &EvalContext,
) -> Result<Box<dyn Evaluator>, PipelineError> {
    let err = |e: EvalError| PipelineError::eval(Stage::Evaluator, e);
    Ok(match &cfg.evaluator {
        EvaluatorSpec::Planted {
            planted,
            noise_sigma,
        } => {
            let p = ChannelSubset::new(planted.iter().copied(), ctx.universe_size)
                .map_err(|e| PipelineError::config(format!("planted subset: {e}")))?;
            let noise_seed = SeedStreams::new(cfg.seed).seed_for(Stream::EvaluatorNoise);
            Box::new(
                PlantedEvaluator::new(p, *noise_sigma, noise_seed)
                    .map_err(|e| PipelineError::config(e.to_string()))?,
            )
        }
        EvaluatorSpec::Linear => Box::new(LinearProbeEvaluator::new(ctx).map_err(err)?),
        EvaluatorSpec::External { command } => {
            let cmd = PluginCommand::parse(command).map_err(|e| err(e.into()))?;
            Box::new(
                ExternalEvaluator::spawn(cmd, cfg.threads.max(1), Timeouts::default())
                    .map_err(|e| err(e.into()))?,
            )
        }
    })
}

/// Everything a run produced, including the pieces the report summarizes.
pub struct RunOutcome {
    pub report: RunReport,
    pub dgaff: Option<DgaffResult>,
}

/// Runs the search stages against an existing engine.
pub fn run_search(cfg: &RunConfig, engine: &EvalEngine<'_>) -> Result<RunOutcome, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut stage_seconds = BTreeMap::new();
    let mut timed = |name: &str, t: Instant| {
        stage_seconds.insert(name.to_string(), t.elapsed().as_secs_f64());
    };
    let c = engine.universe_size();
    let k = cfg.k;
    let hics_cfg = HicsConfig::new(k, c)
        .map_err(|e| PipelineError::search(Stage::Config, e))?
        .with_full_sweep(cfg.hics_full_sweep);

    let mut hics = None;
    let mut weights: Option<WeightVector> = None;
    let mut generations: Vec<GenerationStats> = Vec::new();
    let mut tally_report = None;
    let mut dgaff = None;

    let selected = match cfg.mode {
        Mode::HicsOnly => {
            let t = Instant::now();
            let (subset, trace) = if cfg.hics_full_sweep {
                run_hics(&hics_cfg, engine)
            } else {
                grow_greedy(k, engine).map(|trace| {
                    let s = trace
                        .levels
                        .last()
                        .map(|l| l.subset.clone())
                        .expect("K >= 1");
                    (s, trace)
                })
            }
            .map_err(|e| PipelineError::search(Stage::Hics, e))?;
            timed("hics", t);
            hics = Some(HicsSummary {
                subset: subset.clone(),
                trace,
            });
            subset
        }
        Mode::Combined | Mode::DgaffOnly => {
            let w = if cfg.mode == Mode::Combined {
                let t = Instant::now();
                let (subset, trace) = run_hics(&hics_cfg, engine)
                    .map_err(|e| PipelineError::search(Stage::Hics, e))?;
                timed("hics", t);
                let w = build_weights(&subset, c, cfg.m.expect("validated"))
                    .map_err(PipelineError::weights)?;
                hics = Some(HicsSummary { subset, trace });
                w
            } else {
                WeightVector::uniform(c).map_err(PipelineError::weights)?
            };

            let t = Instant::now();
            let result = run_dgaff(&cfg.ga, &w, engine)
                .map_err(|e| PipelineError::search(Stage::Dgaff, e))?;
            timed("dgaff", t);

            let tally = tally_unique(&result.population);
            let gamma = GammaConfig::new(cfg.gamma).expect("validated");
            let chosen = match select_final_with_cardinality(&tally, &gamma, Some(k)) {
                Ok(s) => s,
                // Only zero-fitness wrong-size subsets survived: fall back to
                // the best K-subset in the history.
                Err(SearchError::EmptyTally) => engine
                    .cache()
                    .best_with_cardinality(k)
                    .map(|(s, _)| s)
                    .ok_or_else(|| {
                        PipelineError::new(
                            Stage::Select,
                            ErrorKind::Evaluator,
                            "no valid subset was ever evaluated",
                        )
                    })?,
                Err(e) => return Err(PipelineError::search(Stage::Select, e)),
            };
            tally_report = Some(TallyReport::new(&tally, cfg.gamma));
            generations = result.generations.clone();
            weights = Some(w);
            dgaff = Some(result);
            chosen
        }
    };

    let t = Instant::now();
    let final_score = engine
        .evaluate(&selected)
        .map_err(|e| PipelineError::eval(Stage::FinalEvaluation, e))?
        .score;
    timed("final_evaluation", t);

    let histogram = ChannelHistogram::from_subsets(c, [&selected]);
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        evaluator: engine.evaluator().name(),
        universe_size: c,
        hics,
        weights: weights.map(|w| w.weights().to_vec()),
        generations,
        tally: tally_report,
        selected,
        final_score,
        histogram,
        eval_stats: engine.cache().stats(),
        execution: ExecutionInfo {
            threads: cfg.threads.max(1),
            stage_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    };
    Ok(RunOutcome { report, dgaff })
}

/// Full run: prepare data, build the evaluator, search, report.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let ctx = prepare_context(cfg)?;
    let evaluator = build_evaluator(cfg, &ctx)?;
    let cache = SubsetCache::new();
    let engine = EvalEngine::new(evaluator.as_ref(), &ctx, &cache, cfg.threads)
        .map_err(|e| PipelineError::eval(Stage::Evaluator, e))?;
    Ok(run_search(cfg, &engine)?.report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyReport {
    pub schema_version: u32,
    pub selected: ChannelSubset,
    pub evaluator: String,
    pub test_trials: usize,
    pub score: f64,
}

/// Forward path for daily use: train on the selection run's training data
/// restricted to the chosen channels and score once on a test set.
pub fn apply(
    report: &RunReport,
    test_path: &Path,
    threads: usize,
) -> Result<ApplyReport, PipelineError> {
    let mut cfg = report.config.clone();
    cfg.threads = threads;
    let train_path = cfg
        .train
        .clone()
        .ok_or_else(|| PipelineError::config("the report's run used no training dataset"))?;
    let raw_train = load_dataset(&train_path).map_err(|e| PipelineError::tensor(Stage::Load, e))?;
    let raw_test = load_dataset(test_path).map_err(|e| PipelineError::tensor(Stage::Load, e))?;
    let train = prepare(&raw_train, &cfg)?;
    let test = prepare(&raw_test, &cfg)?;
    let test_trials = test.n_trials();
    let mut ctx = EvalContext::from_datasets(train, test);
    if let EvaluatorSpec::External { .. } = cfg.evaluator {
        let dir = cfg.work_dir.clone().unwrap_or_else(|| {
            std::env::temp_dir().join(format!("chansel-apply-{}", std::process::id()))
        });
        std::fs::create_dir_all(&dir)
            .map_err(|e| PipelineError::new(Stage::Preprocess, ErrorKind::Io, e.to_string()))?;
        let (tp, vp) = (dir.join("apply_train.sft"), dir.join("apply_test.sft"));
        save_dataset(ctx.train.as_ref().unwrap(), &tp)
            .map_err(|e| PipelineError::tensor(Stage::Preprocess, e))?;
        save_dataset(ctx.valid.as_ref().unwrap(), &vp)
            .map_err(|e| PipelineError::tensor(Stage::Preprocess, e))?;
        ctx = ctx.with_paths(tp, vp);
    }
    let evaluator = build_evaluator(&cfg, &ctx)?;
    let cache = SubsetCache::new();
    let record = crate::evaluator::evaluate(evaluator.as_ref(), &report.selected, &ctx, &cache)
        .map_err(|e| PipelineError::eval(Stage::FinalEvaluation, e))?;
    Ok(ApplyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        selected: report.selected.clone(),
        evaluator: evaluator.name(),
        test_trials,
        score: record.score,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSelection {
    pub seed: u64,
    pub subset: ChannelSubset,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub selections: Vec<GammaSelection>,
    pub mean_score: f64,
    pub histogram: ChannelHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitComparison {
    pub seed: u64,
    /// Per-generation best fitness with the greedy-biased initial population.
    pub weighted_best: Vec<f64>,
    /// Same, with uniform initialization.
    pub uniform_best: Vec<f64>,
    /// First generation reaching the overall best value of each run.
    pub weighted_generations_to_best: usize,
    pub uniform_generations_to_best: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub gammas: Vec<f64>,
    pub rows: Vec<GammaRow>,
    pub init_comparison: Vec<InitComparison>,
}

fn generations_to_best(curve: &[f64]) -> usize {
    let best = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    curve.iter().position(|&v| v == best).unwrap_or(0)
}

/// Runs the pipeline once per seed, then re-selects every run's final tally
/// for each gamma. With `compare_init`, each seed is also run with uniform
/// initialization to compare convergence.
pub fn sweep(
    base: &RunConfig,
    seeds: &[u64],
    gammas: &[f64],
    compare_init: bool,
) -> Result<SweepReport, PipelineError> {
    if base.mode == Mode::HicsOnly {
        return Err(PipelineError::config("sweeps need the genetic stage"));
    }
    if seeds.is_empty() || gammas.is_empty() {
        return Err(PipelineError::config(
            "sweep needs at least one seed and one gamma",
        ));
    }
    let gamma_cfgs = gammas
        .iter()
        .map(|&g| GammaConfig::new(g).map_err(|e| PipelineError::config(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<GammaRow> = gammas
        .iter()
        .map(|&gamma| GammaRow {
            gamma,
            selections: Vec::new(),
            mean_score: 0.0,
            histogram: ChannelHistogram::new(0),
        })
        .collect();
    let mut init_comparison = Vec::new();

    for &seed in seeds {
        let mut cfg = base.clone();
        cfg.seed = seed;
        cfg.ga.seed = seed;
        cfg.validate()?;
        let ctx = prepare_context(&cfg)?;
        let evaluator = build_evaluator(&cfg, &ctx)?;
        let cache = SubsetCache::new();
        let engine = EvalEngine::new(evaluator.as_ref(), &ctx, &cache, cfg.threads)
            .map_err(|e| PipelineError::eval(Stage::Evaluator, e))?;
        let outcome = run_search(&cfg, &engine)?;
        let tally = outcome
            .report
            .tally
            .as_ref()
            .map(TallyReport::to_tally)
            .expect("genetic modes produce a tally");
        for (row, g) in rows.iter_mut().zip(&gamma_cfgs) {
            let subset = match select_final_with_cardinality(&tally, g, Some(cfg.k)) {
                Ok(s) => s,
                Err(_) => outcome.report.selected.clone(),
            };
            let score = engine
                .evaluate(&subset)
                .map_err(|e| PipelineError::eval(Stage::FinalEvaluation, e))?
                .score;
            if row.histogram.counts.is_empty() {
                row.histogram = ChannelHistogram::new(ctx.universe_size);
            }
            row.histogram.add(&subset);
            row.selections.push(GammaSelection {
                seed,
                subset,
                score,
            });
        }

        if compare_init && cfg.mode == Mode::Combined {
            let uniform_cfg = cfg.clone().with_mode(Mode::DgaffOnly);
            let ucache = SubsetCache::new();
            let uengine = EvalEngine::new(evaluator.as_ref(), &ctx, &ucache, cfg.threads)
                .map_err(|e| PipelineError::eval(Stage::Evaluator, e))?;
            let uniform = run_search(&uniform_cfg, &uengine)?;
            let curve = |r: &RunReport| {
                r.generations
                    .iter()
                    .map(|g| g.best_fitness)
                    .collect::<Vec<_>>()
            };
            let (wb, ub) = (curve(&outcome.report), curve(&uniform.report));
            init_comparison.push(InitComparison {
                seed,
                weighted_generations_to_best: generations_to_best(&wb),
                uniform_generations_to_best: generations_to_best(&ub),
                weighted_best: wb,
                uniform_best: ub,
            });
        }
    }
    for row in &mut rows {
        row.mean_score =
            row.selections.iter().map(|s| s.score).sum::<f64>() / row.selections.len() as f64;
    }
    Ok(SweepReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: base.clone(),
        seeds: seeds.to_vec(),
        gammas: gammas.to_vec(),
        rows,
        init_comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluator_spec_parsing() {
        assert_eq!(
            EvaluatorSpec::parse("linear", None, 0.0),
            Ok(EvaluatorSpec::Linear)
        );
        assert_eq!(
            EvaluatorSpec::parse("external:python3 plugin.py", None, 0.0),
            Ok(EvaluatorSpec::External {
                command: "python3 plugin.py".into()
            })
        );
        assert!(EvaluatorSpec::parse("planted", None, 0.0).is_err());
        assert!(EvaluatorSpec::parse("external:", None, 0.0).is_err());
        assert!(EvaluatorSpec::parse("svm", None, 0.0).is_err());
    }

    #[test]
    fn mode_rules() {
        let cfg = RunConfig::planted(10, 3, vec![1, 2, 3], 0.0, 1);
        assert!(cfg.validate().is_ok());
        let mut bad = cfg.clone();
        bad.mode = Mode::DgaffOnly;
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
        assert!(cfg.clone().with_mode(Mode::DgaffOnly).validate().is_ok());
        let mut no_data = cfg;
        no_data.channels = None;
        assert!(no_data.validate().is_err());
    }

    #[test]
    fn stage_names() {
        assert_eq!(Stage::FinalEvaluation.to_string(), "final-evaluation");
    }
}
