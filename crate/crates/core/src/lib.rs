//! Channel subset selection for EEG classification: a greedy incremental
//! search seeds a weighted genetic search over fixed-size channel subsets,
//! with cached and optionally external fitness evaluation.

pub mod dgaff;
pub mod error;
pub mod evaluator;
pub mod hics;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod rng;
pub mod subsetselect;
pub mod tensorio;
pub mod weightform;

pub use error::SearchError;
pub use evaluator::{ChannelSubset, EvalContext, EvalEngine, Evaluator, SubsetCache};
pub use pipeline::{run_pipeline, Mode, RunConfig};
pub use report::RunReport;
