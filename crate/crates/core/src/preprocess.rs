//! Trial preparation: artifact rejection, cue-locked windowing, amplitude
//! normalization and a stratified train/validation split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::StreamRng;
use crate::tensorio::Dataset;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("every trial is flagged as an artifact")]
    AllTrialsRejected,
    #[error("window out of bounds: {0}")]
    WindowOutOfBounds(String),
    #[error("invalid amplitude limit {0}")]
    InvalidAmplitudeLimit(f64),
    #[error("too few trials for a split: {0}")]
    TooFewTrials(String),
}

/// Time window relative to trial start, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub cue_onset_s: f64,
    pub pre_cue_s: f64,
    pub task_end_s: f64,
}

impl Default for WindowSpec {
    /// Cue at 2 s, window from 0.5 s before the cue to the end of imagery at 6 s.
    fn default() -> Self {
        Self {
            cue_onset_s: 2.0,
            pre_cue_s: 0.5,
            task_end_s: 6.0,
        }
    }
}

impl WindowSpec {
    pub fn start_s(&self) -> f64 {
        self.cue_onset_s - self.pre_cue_s
    }

    /// `(first sample, sample count)` at the given rate, checked against `n_samples`.
    pub fn sample_range(
        &self,
        sample_rate_hz: f64,
        n_samples: usize,
    ) -> Result<(usize, usize), PreprocessError> {
        let start = self.start_s();
        if !(start.is_finite() && self.task_end_s.is_finite()) || start < 0.0 {
            return Err(PreprocessError::WindowOutOfBounds(format!(
                "window start {start} s is negative or not finite"
            )));
        }
        if start >= self.task_end_s {
            return Err(PreprocessError::WindowOutOfBounds(format!(
                "empty window [{start} s, {} s)",
                self.task_end_s
            )));
        }
        let first = (start * sample_rate_hz).round() as usize;
        let len = ((self.task_end_s - start) * sample_rate_hz).round() as usize;
        if len == 0 {
            return Err(PreprocessError::WindowOutOfBounds(
                "window shorter than one sample".into(),
            ));
        }
        if first + len > n_samples {
            return Err(PreprocessError::WindowOutOfBounds(format!(
                "samples [{first}, {}) exceed trial length {n_samples}",
                first + len
            )));
        }
        Ok((first, len))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    /// Amplifier range in microvolts.
    pub amplitude_limit: f64,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self {
            amplitude_limit: 100.0,
        }
    }
}

/// Drops every trial flagged as contaminated, preserving order.
pub fn reject_artifacts(d: &Dataset) -> Result<Dataset, PreprocessError> {
    let keep: Vec<usize> = d
        .artifact_flags()
        .iter()
        .enumerate()
        .filter(|(_, &f)| !f)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(PreprocessError::AllTrialsRejected);
    }
    Ok(d.select_trials(&keep))
}

pub fn window_trials(d: &Dataset, w: &WindowSpec) -> Result<Dataset, PreprocessError> {
    let (first, len) = w.sample_range(d.sample_rate_hz(), d.n_samples())?;
    Ok(d.map_series(len, |s| s[first..first + len].to_vec()))
}

/// Maps samples to `[-1, 1]` by the amplitude limit, clamping outliers.
pub fn normalize(d: &Dataset, n: &NormSpec) -> Result<Dataset, PreprocessError> {
    let limit = n.amplitude_limit;
    if !(limit.is_finite() && limit > 0.0) {
        return Err(PreprocessError::InvalidAmplitudeLimit(limit));
    }
    Ok(d.map_samples(|x| ((x as f64 / limit).clamp(-1.0, 1.0)) as f32))
}

/// Stratified split. The validation set receives `round(fraction * N)` trials,
/// apportioned across classes by largest remainder so each class is within
/// one trial of its proportional share. Both halves keep the original order.
pub fn split_train_valid(
    d: &Dataset,
    valid_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), PreprocessError> {
    let mut rng = StreamRng::seed_from_u64(seed);
    if !(valid_fraction > 0.0 && valid_fraction < 1.0) {
        return Err(PreprocessError::TooFewTrials(format!(
            "validation fraction {valid_fraction} must lie in (0, 1)"
        )));
    }
    let n = d.n_trials();
    if n < 2 {
        return Err(PreprocessError::TooFewTrials(format!("{n} trials")));
    }
    let n_valid = (valid_fraction * n as f64).round() as usize;
    if n_valid == 0 || n_valid == n {
        return Err(PreprocessError::TooFewTrials(format!(
            "fraction {valid_fraction} of {n} trials leaves an empty side"
        )));
    }

    let mut by_class: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
    for (i, &l) in d.labels().iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }

    let shares: Vec<(u16, f64)> = by_class
        .iter()
        .map(|(&c, idx)| (c, idx.len() as f64 * n_valid as f64 / n as f64))
        .collect();
    let mut quota: BTreeMap<u16, usize> = shares
        .iter()
        .map(|&(c, s)| (c, s.floor() as usize))
        .collect();
    let mut remaining = n_valid - quota.values().sum::<usize>();
    let mut order: Vec<(u16, f64)> = shares.iter().map(|&(c, s)| (c, s - s.floor())).collect();
    // Largest fractional part first; class label breaks ties.
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (c, _) in order {
        if remaining == 0 {
            break;
        }
        *quota.get_mut(&c).unwrap() += 1;
        remaining -= 1;
    }

    let mut is_valid = vec![false; n];
    for (c, idx) in &by_class {
        let mut shuffled = idx.clone();
        shuffled.shuffle(&mut rng);
        for &i in &shuffled[..quota[c]] {
            is_valid[i] = true;
        }
    }
    let (valid, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| is_valid[i]);
    Ok((d.select_trials(&train), d.select_trials(&valid)))
}
