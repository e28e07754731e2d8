//! Selection-probability weights for the initial population: channels picked
//! by the greedy stage get raw weight `m`, all others 1, then the vector is
//! normalized to sum to one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::ChannelSubset;

pub const DEFAULT_M: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("weight vector over an empty channel set")]
    EmptyUniverse,
    #[error("bias m = {0} must be finite and >= 1")]
    InvalidBias(f64),
    #[error("selected subset covers {got} channels, expected {expected}")]
    UniverseMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(universe_size: usize) -> Result<Self, WeightError> {
        build_weights(&ChannelSubset::empty(universe_size), universe_size, 1.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn build_weights(
    selected: &ChannelSubset,
    universe_size: usize,
    m: f64,
) -> Result<WeightVector, WeightError> {
    if universe_size == 0 {
        return Err(WeightError::EmptyUniverse);
    }
    if !(m.is_finite() && m >= 1.0) {
        return Err(WeightError::InvalidBias(m));
    }
    if selected.universe_size() != universe_size {
        return Err(WeightError::UniverseMismatch {
            expected: universe_size,
            got: selected.universe_size(),
        });
    }
    let k = selected.len() as f64;
    let total = k * m + (universe_size as f64 - k);
    let (hi, lo) = (m / total, 1.0 / total);
    let weights = (0..universe_size)
        .map(|i| if selected.contains(i) { hi } else { lo })
        .collect();
    Ok(WeightVector { weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_two_channels_five_selected() {
        let sel = ChannelSubset::new([0, 3, 7, 12, 20], 22).unwrap();
        let w = build_weights(&sel, 22, 2.0).unwrap();
        assert_eq!(w.weights()[3], 2.0 / 27.0);
        assert_eq!(w.weights()[1], 1.0 / 27.0);
    }

    #[test]
    fn degenerate_cases_are_uniform() {
        let sel = ChannelSubset::new([1, 2], 4).unwrap();
        let w = build_weights(&sel, 4, 1.0).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.25));
        let w = build_weights(&ChannelSubset::empty(4), 4, 5.0).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.25));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            build_weights(&ChannelSubset::empty(0), 0, 2.0),
            Err(WeightError::EmptyUniverse)
        );
        assert_eq!(
            build_weights(&ChannelSubset::empty(3), 3, 0.5),
            Err(WeightError::InvalidBias(0.5))
        );
    }
}
