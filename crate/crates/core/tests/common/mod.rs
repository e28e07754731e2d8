#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use chansel::tensorio::Dataset;

pub const MOCK_PLUGIN: &str = env!("CARGO_BIN_EXE_chansel-mock-plugin");
pub const CLI: &str = env!("CARGO_BIN_EXE_chansel");

/// Gaussian trials whose standard deviation on `informative` channels
/// depends on the class; every other channel is class-independent noise.
pub fn gaussian_trials(
    n_trials: usize,
    n_channels: usize,
    n_samples: usize,
    n_classes: u16,
    informative: &[usize],
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0f64, 1.0).unwrap();
    let mut data = Vec::with_capacity(n_trials * n_channels * n_samples);
    let mut labels = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        let class = (trial % n_classes as usize) as u16;
        labels.push(class);
        for ch in 0..n_channels {
            let sd = if informative.contains(&ch) {
                10.0 * (1.0 + 1.5 * class as f64)
            } else {
                10.0 + rng.random_range(0.0..2.0)
            };
            for _ in 0..n_samples {
                data.push((unit.sample(&mut rng) * sd) as f32);
            }
        }
    }
    Dataset::new(
        (n_trials, n_channels, n_samples),
        data,
        labels,
        vec![false; n_trials],
        250.0,
    )
    .unwrap()
}
