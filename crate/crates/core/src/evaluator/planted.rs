//! Synthetic fitness with a known optimum, for exercising the search stages.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use super::{ChannelSubset, EvalError, EvalOutcome, EvalRequest, Evaluator};
use crate::rng::{fold_seed, StreamRng};

/// |a ∩ b| / |a ∪ b|; two empty sets are identical and score 1.
pub fn jaccard(a: &ChannelSubset, b: &ChannelSubset) -> f64 {
    let union = a.union_len(b);
    if union == 0 {
        return 1.0;
    }
    a.intersection_len(b) as f64 / union as f64
}

/// Jaccard similarity to `planted` plus Gaussian noise, clamped to `[0, 1]`.
pub fn planted_fitness<R: Rng + ?Sized>(
    s: &ChannelSubset,
    planted: &ChannelSubset,
    noise_sigma: f64,
    rng: &mut R,
) -> f64 {
    let base = jaccard(s, planted);
    let noise = if noise_sigma > 0.0 {
        Normal::new(0.0, noise_sigma)
            .expect("positive finite sigma")
            .sample(rng)
    } else {
        0.0
    };
    (base + noise).clamp(0.0, 1.0)
}

/// Planted-optimum evaluator. Warm-started calls draw noise with a reduced
/// sigma, mimicking fine-tuning from saved weights.
#[derive(Debug, Clone)]
pub struct PlantedEvaluator {
    planted: ChannelSubset,
    noise_sigma: f64,
    warm_sigma_scale: f64,
    noise_seed: u64,
}

impl PlantedEvaluator {
    pub fn new(
        planted: ChannelSubset,
        noise_sigma: f64,
        noise_seed: u64,
    ) -> Result<Self, EvalError> {
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(EvalError::EvaluatorFailure(format!(
                "noise sigma {noise_sigma} must be finite and non-negative"
            )));
        }
        Ok(Self {
            planted,
            noise_sigma,
            warm_sigma_scale: 0.25,
            noise_seed,
        })
    }

    pub fn with_warm_sigma_scale(mut self, scale: f64) -> Self {
        self.warm_sigma_scale = scale;
        self
    }

    pub fn planted(&self) -> &ChannelSubset {
        &self.planted
    }

    fn noise_rng(&self, s: &ChannelSubset, attempt: usize) -> StreamRng {
        let words = s.members().iter().map(|&m| m as u64).chain([
            u64::MAX,
            s.universe_size() as u64,
            attempt as u64,
        ]);
        StreamRng::seed_from_u64(fold_seed(self.noise_seed, words))
    }
}

impl Evaluator for PlantedEvaluator {
    fn name(&self) -> String {
        format!("planted(sigma={})", self.noise_sigma)
    }

    fn is_deterministic(&self) -> bool {
        self.noise_sigma == 0.0
    }

    fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
        if req.subset.universe_size() != self.planted.universe_size() {
            return Err(EvalError::InvalidSubset(format!(
                "subset universe {} != planted universe {}",
                req.subset.universe_size(),
                self.planted.universe_size()
            )));
        }
        let sigma = if req.warm_key.is_some() {
            self.noise_sigma * self.warm_sigma_scale
        } else {
            self.noise_sigma
        };
        let mut rng = self.noise_rng(req.subset, req.attempt);
        let score = planted_fitness(req.subset, &self.planted, sigma, &mut rng);
        Ok(EvalOutcome {
            score,
            state_key: Some(format!("planted:{}", req.subset)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(m: &[usize], c: usize) -> ChannelSubset {
        ChannelSubset::new(m.iter().copied(), c).unwrap()
    }

    #[test]
    fn identity_and_disjoint() {
        let mut rng = StreamRng::seed_from_u64(0);
        let p = sub(&[1, 4, 6], 10);
        assert_eq!(planted_fitness(&p, &p, 0.0, &mut rng), 1.0);
        assert_eq!(planted_fitness(&sub(&[0, 2], 10), &p, 0.0, &mut rng), 0.0);
    }

    #[test]
    fn hand_computed_third() {
        // |s ∩ p| = {1,4} = 2, |s ∪ p| = {0,1,3,4,6,7} = 6
        let mut rng = StreamRng::seed_from_u64(0);
        let s = sub(&[0, 1, 3, 4], 10);
        let p = sub(&[1, 4, 6, 7], 10);
        assert!((planted_fitness(&s, &p, 0.0, &mut rng) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn noise_is_clamped() {
        let mut rng = StreamRng::seed_from_u64(9);
        let p = sub(&[0], 3);
        for _ in 0..200 {
            let v = planted_fitness(&p, &p, 0.5, &mut rng);
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
