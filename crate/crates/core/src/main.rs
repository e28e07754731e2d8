use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chansel::dgaff::{default_pairs, GaConfig};
use chansel::evaluator::conformance::run_conformance;
use chansel::evaluator::external::Timeouts;
use chansel::evaluator::PluginCommand;
use chansel::pipeline::{self, EvaluatorSpec, Mode, PipelineError, RunConfig};
use chansel::preprocess::{NormSpec, WindowSpec};
use chansel::report::{canonical_json, read_report, render_summary};
use chansel::tensorio::{load_dataset, MAGIC};

#[derive(Debug, Parser)]
#[command(name = "chansel", version, about = "EEG channel subset selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select a K-channel subset and write a run report.
    Select {
        #[command(flatten)]
        run: RunArgs,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a report's selected subset once on held-out test data.
    Apply {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat selection over several seeds and gamma values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated seeds; overrides --seed.
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        /// Comma-separated gamma values.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
        )]
        gamma_sweep: Vec<f64>,
        /// Also run uniform initialization per seed and compare convergence.
        #[arg(long)]
        compare_init: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a run report or a tensor file header.
    Inspect { path: PathBuf },
    /// Check a plugin against the evaluator protocol.
    Conformance {
        /// Plugin command line.
        #[arg(long)]
        plugin: String,
        /// Directory for the probe datasets; a temporary one when omitted.
        #[arg(long)]
        work_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        handshake_timeout: u64,
        #[arg(long, default_value_t = 600)]
        evaluate_timeout: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Combined,
    HicsOnly,
    DgaffOnly,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Training recordings (tensor file).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Validation recordings; otherwise split from --train.
    #[arg(long)]
    valid: Option<PathBuf>,
    /// Channel count for synthetic evaluators without data.
    #[arg(long)]
    channels: Option<usize>,
    /// Cue onset within each trial, seconds. Enables windowing.
    #[arg(long)]
    cue_onset: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pre_cue: f64,
    #[arg(long, default_value_t = 6.0)]
    task_end: f64,
    #[arg(long, default_value_t = 100.0)]
    amp_limit: f64,
    #[arg(long, default_value_t = 0.2)]
    valid_frac: f64,
    #[arg(long)]
    k: usize,
    /// Bias of greedy-picked channels in the initial population.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    hics_full_sweep: bool,
    #[arg(long, default_value_t = chansel::dgaff::DEFAULT_N_FP)]
    n_fp: usize,
    #[arg(long, default_value_t = chansel::dgaff::DEFAULT_N_G)]
    n_g: usize,
    /// Parent pairs per generation; derived from --n-fp when omitted.
    #[arg(long)]
    n_p: Option<usize>,
    #[arg(long, default_value_t = chansel::dgaff::DEFAULT_P_C)]
    p_c: f64,
    #[arg(long, default_value_t = chansel::dgaff::DEFAULT_P_M)]
    p_m: f64,
    #[arg(long, default_value_t = chansel::dgaff::DEFAULT_TOURNAMENT_SIZE)]
    tournament_size: usize,
    /// Let children with the wrong channel count survive tournaments.
    #[arg(long)]
    invalid_survivors: bool,
    #[arg(long, default_value_t = chansel::subsetselect::DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "combined")]
    mode: ModeArg,
    /// Same as --mode dgaff-only.
    #[arg(long)]
    no_weighted_init: bool,
    /// planted, linear or external:<command>.
    #[arg(long, default_value = "linear")]
    evaluator: String,
    /// Comma-separated channels for the planted evaluator.
    #[arg(long, value_delimiter = ',')]
    planted: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Where datasets for external plugins are written.
    #[arg(long)]
    work_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig, PipelineError> {
        let mut mode = match self.mode {
            ModeArg::Combined => Mode::Combined,
            ModeArg::HicsOnly => Mode::HicsOnly,
            ModeArg::DgaffOnly => Mode::DgaffOnly,
        };
        if self.no_weighted_init {
            if mode == Mode::HicsOnly {
                return Err(PipelineError::config(
                    "--no-weighted-init conflicts with --mode hics-only",
                ));
            }
            mode = Mode::DgaffOnly;
        }
        let m = match (mode, self.m) {
            (Mode::Combined, None) => Some(chansel::weightform::DEFAULT_M),
            (_, m) => m,
        };
        let evaluator =
            EvaluatorSpec::parse(&self.evaluator, self.planted.clone(), self.noise_sigma)
                .map_err(PipelineError::config)?;
        let ga = GaConfig {
            k_target: self.k,
            n_fp: self.n_fp,
            n_g: self.n_g,
            n_p: self.n_p.unwrap_or_else(|| default_pairs(self.n_fp)),
            p_c: self.p_c,
            p_m: self.p_m,
            tournament_size: self.tournament_size,
            seed: self.seed,
            invalid_survivors: self.invalid_survivors,
        };
        let window = self.cue_onset.map(|cue| WindowSpec {
            cue_onset_s: cue,
            pre_cue_s: self.pre_cue,
            task_end_s: self.task_end,
        });
        Ok(RunConfig {
            train: self.train.clone(),
            valid: self.valid.clone(),
            channels: self.channels,
            window,
            norm: NormSpec {
                amplitude_limit: self.amp_limit,
            },
            valid_fraction: self.valid_frac,
            k: self.k,
            m,
            ga,
            gamma: self.gamma,
            evaluator,
            mode,
            hics_full_sweep: self.hics_full_sweep,
            seed: self.seed,
            work_dir: self.work_dir.clone(),
            threads: self.threads.max(1),
        })
    }
}

fn write_out(json: &str, out: Option<&Path>) -> Result<(), PipelineError> {
    match out {
        Some(p) => std::fs::write(p, json).map_err(|e| io_err(p, e)),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn io_err(p: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(
        pipeline::Stage::Report,
        pipeline::ErrorKind::Io,
        format!("{}: {e}", p.display()),
    )
}

fn inspect(path: &Path) -> Result<(), PipelineError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.starts_with(&MAGIC) {
        let d = load_dataset(path).map_err(|e| io_err(path, e))?;
        let (n, c, t) = d.shape();
        let rejected = d.artifact_flags().iter().filter(|&&f| f).count();
        println!("trials:      {n}");
        println!("channels:    {c}");
        println!("samples:     {t}");
        println!("sample rate: {} Hz", d.sample_rate_hz());
        println!("classes:     {}", d.num_classes());
        println!("flagged:     {rejected}");
        return Ok(());
    }
    let report = read_report(path).map_err(|e| io_err(path, e))?;
    print!("{}", render_summary(&report));
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Select { run, out } => {
            let cfg = run.to_config()?;
            let report = pipeline::run_pipeline(&cfg)?;
            eprint!("{}", render_summary(&report));
            write_out(&report.to_json(), out.as_deref())
        }
        Command::Apply {
            report,
            test,
            threads,
            out,
        } => {
            let r = read_report(&report).map_err(|e| io_err(&report, e))?;
            let applied = pipeline::apply(&r, &test, threads)?;
            eprintln!(
                "subset {:?} scored {:.4} on {} test trials",
                applied.selected.members(),
                applied.score,
                applied.test_trials
            );
            write_out(
                &canonical_json(&applied).expect("serializes"),
                out.as_deref(),
            )
        }
        Command::Sweep {
            run,
            seeds,
            gamma_sweep,
            compare_init,
            out,
        } => {
            let cfg = run.to_config()?;
            let report = pipeline::sweep(&cfg, &seeds, &gamma_sweep, compare_init)?;
            for row in &report.rows {
                eprintln!(
                    "gamma {:.2}: mean score {:.4}, histogram {:?}",
                    row.gamma, row.mean_score, row.histogram.counts
                );
            }
            write_out(
                &canonical_json(&report).expect("serializes"),
                out.as_deref(),
            )
        }
        Command::Inspect { path } => inspect(&path),
        Command::Conformance {
            plugin,
            work_dir,
            handshake_timeout,
            evaluate_timeout,
        } => {
            let cmd =
                PluginCommand::parse(&plugin).map_err(|e| PipelineError::config(e.to_string()))?;
            let tmp;
            let dir = match work_dir {
                Some(d) => d,
                None => {
                    tmp = std::env::temp_dir().join(format!("chansel-conf-{}", std::process::id()));
                    tmp
                }
            };
            std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
            let timeouts = Timeouts {
                handshake: std::time::Duration::from_secs(handshake_timeout),
                evaluate: std::time::Duration::from_secs(evaluate_timeout),
            };
            let report = run_conformance(&cmd, &dir, timeouts);
            for c in &report.checks {
                println!(
                    "{} {:<14} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if report.passed() {
                Ok(())
            } else {
                Err(PipelineError::new(
                    pipeline::Stage::Evaluator,
                    pipeline::ErrorKind::Evaluator,
                    "plugin failed conformance",
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
