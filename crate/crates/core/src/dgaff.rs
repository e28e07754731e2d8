//! Fixed-cardinality genetic algorithm over binary channel masks.
//!
//! The initial population holds `n_fp` masks with exactly `K` ones, drawn by
//! weighted sampling without replacement. Each generation draws `n_p` parent
//! pairs, applies two-point crossover and per-gene mutation, scores every
//! child (children whose popcount drifted from `K` score 0 without touching
//! the evaluator) and keeps `n_fp` survivors by tournament. There is no
//! elitism: survivors come from the offspring only.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::evaluator::{ChannelSubset, EvalEngine};
use crate::rng::{SeedStreams, Stream};
use crate::weightform::WeightVector;

pub const DEFAULT_N_FP: usize = 12;
pub const DEFAULT_N_G: usize = 12;
pub const DEFAULT_P_C: f64 = 0.85;
pub const DEFAULT_P_M: f64 = 0.08;
pub const DEFAULT_TOURNAMENT_SIZE: usize = 2;

/// `round(7 * n_fp / 2)`, halves rounded up.
pub fn default_pairs(n_fp: usize) -> usize {
    (7 * n_fp).div_ceil(2)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    bits: Vec<bool>,
}

impl Chromosome {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_subset(s: &ChannelSubset) -> Self {
        Self { bits: s.to_mask() }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_subset(&self) -> ChannelSubset {
        ChannelSubset::from_mask(&self.bits)
    }

    /// Canonical order: lexicographic on the sorted member list.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.to_subset().cmp(&other.to_subset())
    }
}

impl std::fmt::Display for Chromosome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub k_target: usize,
    pub n_fp: usize,
    pub n_g: usize,
    pub n_p: usize,
    pub p_c: f64,
    pub p_m: f64,
    pub tournament_size: usize,
    pub seed: u64,
    /// Let children with the wrong channel count compete in survivor
    /// tournaments (they always carry fitness 0). Off by default: such
    /// children are only kept when no child has exactly `k_target` channels.
    #[serde(default)]
    pub invalid_survivors: bool,
}

impl GaConfig {
    pub fn new(k_target: usize, seed: u64) -> Self {
        Self {
            k_target,
            n_fp: DEFAULT_N_FP,
            n_g: DEFAULT_N_G,
            n_p: default_pairs(DEFAULT_N_FP),
            p_c: DEFAULT_P_C,
            p_m: DEFAULT_P_M,
            tournament_size: DEFAULT_TOURNAMENT_SIZE,
            seed,
            invalid_survivors: false,
        }
    }

    pub fn validate(&self, universe_size: usize) -> Result<(), SearchError> {
        let bad = |msg: String| Err(SearchError::InvalidConfig(msg));
        if self.k_target == 0 || self.k_target > universe_size {
            return bad(format!(
                "K = {} must lie in [1, {universe_size}]",
                self.k_target
            ));
        }
        if self.n_fp < 2 {
            return bad(format!("n_fp = {} must be >= 2", self.n_fp));
        }
        if self.n_g < 1 || self.n_p < 1 || self.tournament_size < 1 {
            return bad("n_g, n_p and tournament_size must be >= 1".into());
        }
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub individuals: Vec<Chromosome>,
    pub fitness: Vec<f64>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Fittest individual; ties go to the lowest canonical order.
    pub fn best(&self) -> Option<(&Chromosome, f64)> {
        self.individuals
            .iter()
            .zip(self.fitness.iter().copied())
            .min_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.canonical_cmp(b.0)))
    }

    pub fn mean_fitness(&self) -> f64 {
        if self.fitness.is_empty() {
            return 0.0;
        }
        self.fitness.iter().sum::<f64>() / self.fitness.len() as f64
    }

    pub fn contains_subset(&self, s: &ChannelSubset) -> bool {
        self.individuals.iter().any(|c| &c.to_subset() == s)
    }
}

/// `n_fp` chromosomes with exactly `k` ones each, placed by sequential
/// weighted sampling without replacement.
pub fn init_population<R: Rng + ?Sized>(
    w: &WeightVector,
    k: usize,
    n_fp: usize,
    rng: &mut R,
) -> Result<Vec<Chromosome>, SearchError> {
    let c = w.len();
    if k > c {
        return Err(SearchError::InvalidConfig(format!(
            "K = {k} exceeds {c} channels"
        )));
    }
    let mut out = Vec::with_capacity(n_fp);
    for _ in 0..n_fp {
        let mut remaining: Vec<(usize, f64)> = w.weights().iter().copied().enumerate().collect();
        let mut bits = vec![false; c];
        for _ in 0..k {
            let total: f64 = remaining.iter().map(|&(_, wt)| wt).sum();
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = remaining.len() - 1;
            for (i, &(_, wt)) in remaining.iter().enumerate() {
                acc += wt;
                if target < acc {
                    pick = i;
                    break;
                }
            }
            let (channel, _) = remaining.remove(pick);
            bits[channel] = true;
        }
        out.push(Chromosome::new(bits));
    }
    Ok(out)
}

/// Swaps the segment `[u, v)` between two parents.
pub fn crossover_at(
    a: &Chromosome,
    b: &Chromosome,
    u: usize,
    v: usize,
) -> (Chromosome, Chromosome) {
    assert_eq!(a.len(), b.len(), "parents differ in length");
    assert!(u <= v && v <= a.len(), "cut points out of range");
    let mut x = a.bits.clone();
    let mut y = b.bits.clone();
    x[u..v].copy_from_slice(&b.bits[u..v]);
    y[u..v].copy_from_slice(&a.bits[u..v]);
    (Chromosome::new(x), Chromosome::new(y))
}

/// With probability `p_c`, swaps a random segment `[u, v)` with
/// `0 <= u < v <= C`; otherwise returns copies of the parents.
pub fn two_point_crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    p_c: f64,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let c = a.len();
    if rng.random::<f64>() >= p_c || c == 0 {
        return (a.clone(), b.clone());
    }
    let first = rng.random_range(0..=c);
    let mut second = rng.random_range(0..c);
    if second >= first {
        second += 1;
    }
    let (u, v) = if first < second {
        (first, second)
    } else {
        (second, first)
    };
    crossover_at(a, b, u, v)
}

/// Flips each gene independently with probability `p_m`.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, p_m: f64, rng: &mut R) -> Chromosome {
    Chromosome::new(
        c.bits
            .iter()
            .map(|&b| if rng.random::<f64>() < p_m { !b } else { b })
            .collect(),
    )
}

/// Fitness of one chromosome; exactly 0 without an evaluator call when its
/// popcount differs from `k`.
pub fn guarded_fitness(
    c: &Chromosome,
    k: usize,
    engine: &EvalEngine<'_>,
) -> Result<f64, SearchError> {
    if c.popcount() != k {
        return Ok(0.0);
    }
    Ok(engine.evaluate(&c.to_subset())?.score)
}

/// Batch form of [`guarded_fitness`].
pub fn guarded_fitness_batch(
    chromosomes: &[Chromosome],
    k: usize,
    engine: &EvalEngine<'_>,
) -> Result<Vec<f64>, SearchError> {
    let valid: Vec<(usize, ChannelSubset)> = chromosomes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.popcount() == k)
        .map(|(i, c)| (i, c.to_subset()))
        .collect();
    let subsets: Vec<ChannelSubset> = valid.iter().map(|(_, s)| s.clone()).collect();
    let records = engine.evaluate_batch(&subsets)?;
    let mut out = vec![0.0; chromosomes.len()];
    for ((i, _), r) in valid.iter().zip(records) {
        out[*i] = r.score;
    }
    Ok(out)
}

/// `n_fp` survivors, each the winner of a tournament of `tournament_size`
/// entrants drawn uniformly with replacement.
pub fn tournament_select<R: Rng + ?Sized>(
    pool: &Population,
    n_fp: usize,
    tournament_size: usize,
    rng: &mut R,
) -> Result<Population, SearchError> {
    if pool.is_empty() {
        return Err(SearchError::EmptyPool);
    }
    let size = tournament_size.max(1);
    let mut individuals = Vec::with_capacity(n_fp);
    let mut fitness = Vec::with_capacity(n_fp);
    for _ in 0..n_fp {
        let mut winner = rng.random_range(0..pool.len());
        for _ in 1..size {
            let rival = rng.random_range(0..pool.len());
            let ord = pool.fitness[rival]
                .total_cmp(&pool.fitness[winner])
                .then_with(|| pool.individuals[winner].canonical_cmp(&pool.individuals[rival]));
            if ord == Ordering::Greater {
                winner = rival;
            }
        }
        individuals.push(pool.individuals[winner].clone());
        fitness.push(pool.fitness[winner]);
    }
    Ok(Population {
        individuals,
        fitness,
    })
}

/// Children with exactly `k` channels, in generation order; the whole
/// offspring when none qualifies.
pub fn survivor_pool(offspring: &Population, k: usize) -> Population {
    let (individuals, fitness): (Vec<_>, Vec<_>) = offspring
        .individuals
        .iter()
        .zip(&offspring.fitness)
        .filter(|(c, _)| c.popcount() == k)
        .map(|(c, &y)| (c.clone(), y))
        .unzip();
    if individuals.is_empty() {
        return offspring.clone();
    }
    Population {
        individuals,
        fitness,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 0 is the initial population.
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_subset: ChannelSubset,
    /// Children with popcount K (0 for the initial population row).
    pub valid_children: usize,
    pub distinct_valid_children: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgaffResult {
    pub population: Population,
    pub generations: Vec<GenerationStats>,
    /// Population after each generation, starting with the initial one.
    pub snapshots: Vec<Population>,
    /// Everything scored in each generation: the initial population, then
    /// each generation's children before selection.
    pub offspring: Vec<Population>,
}

impl DgaffResult {
    /// First generation whose population contains `target`, if any.
    pub fn first_hit(&self, target: &ChannelSubset) -> Option<usize> {
        self.snapshots
            .iter()
            .position(|p| p.contains_subset(target))
    }

    /// First generation that produced and scored `target`, if any.
    pub fn first_generated(&self, target: &ChannelSubset) -> Option<usize> {
        self.offspring
            .iter()
            .position(|p| p.contains_subset(target))
    }
}

fn stats(generation: usize, pop: &Population, valid: usize, distinct: usize) -> GenerationStats {
    let (best, best_fitness) = pop.best().expect("population is non-empty");
    GenerationStats {
        generation,
        best_fitness,
        mean_fitness: pop.mean_fitness(),
        best_subset: best.to_subset(),
        valid_children: valid,
        distinct_valid_children: distinct,
    }
}

pub fn run_dgaff(
    cfg: &GaConfig,
    w: &WeightVector,
    engine: &EvalEngine<'_>,
) -> Result<DgaffResult, SearchError> {
    let c = engine.universe_size();
    cfg.validate(c)?;
    if w.len() != c {
        return Err(SearchError::InvalidConfig(format!(
            "weight vector has {} entries for {c} channels",
            w.len()
        )));
    }
    let streams = SeedStreams::new(cfg.seed);
    let mut init_rng = streams.rng(Stream::Init);
    let mut pair_rng = streams.rng(Stream::Pairing);
    let mut cx_rng = streams.rng(Stream::Crossover);
    let mut mut_rng = streams.rng(Stream::Mutation);
    let mut tour_rng = streams.rng(Stream::Tournament);

    let initial = init_population(w, cfg.k_target, cfg.n_fp, &mut init_rng)?;
    let fitness = guarded_fitness_batch(&initial, cfg.k_target, engine)?;
    let mut population = Population {
        individuals: initial,
        fitness,
    };
    let mut generations = vec![stats(0, &population, 0, 0)];
    let mut snapshots = vec![population.clone()];
    let mut scored = vec![population.clone()];

    for generation in 1..=cfg.n_g {
        // All random draws for the generation happen before evaluation.
        let mut children = Vec::with_capacity(2 * cfg.n_p);
        for _ in 0..cfg.n_p {
            let i = pair_rng.random_range(0..population.len());
            let j = pair_rng.random_range(0..population.len());
            let (x, y) = two_point_crossover(
                &population.individuals[i],
                &population.individuals[j],
                cfg.p_c,
                &mut cx_rng,
            );
            children.push(mutate(&x, cfg.p_m, &mut mut_rng));
            children.push(mutate(&y, cfg.p_m, &mut mut_rng));
        }
        let fitness = guarded_fitness_batch(&children, cfg.k_target, engine)?;
        let valid: Vec<ChannelSubset> = children
            .iter()
            .filter(|c| c.popcount() == cfg.k_target)
            .map(Chromosome::to_subset)
            .collect();
        let distinct = valid.iter().collect::<std::collections::HashSet<_>>().len();
        let offspring = Population {
            individuals: children,
            fitness,
        };
        let pool = if cfg.invalid_survivors {
            offspring.clone()
        } else {
            survivor_pool(&offspring, cfg.k_target)
        };
        population = tournament_select(&pool, cfg.n_fp, cfg.tournament_size, &mut tour_rng)?;
        scored.push(offspring);
        generations.push(stats(generation, &population, valid.len(), distinct));
        snapshots.push(population.clone());
    }

    Ok(DgaffResult {
        population,
        generations,
        snapshots,
        offspring: scored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use rand::SeedableRng;

    fn ch(s: &str) -> Chromosome {
        Chromosome::parse(s).unwrap()
    }

    #[test]
    fn crossover_examples() {
        let (x, y) = crossover_at(&ch("110000"), &ch("001100"), 1, 3);
        assert_eq!(
            (x.to_string(), y.to_string()),
            ("101000".into(), "010100".into())
        );
        let (x, y) = crossover_at(&ch("110000"), &ch("001100"), 0, 6);
        assert_eq!((x, y), (ch("001100"), ch("110000")));
        let a = ch("101101");
        for (u, v) in [(0, 1), (2, 5), (0, 6)] {
            assert_eq!(crossover_at(&a, &a, u, v), (a.clone(), a.clone()));
        }
    }

    #[test]
    fn crossover_probability_zero_copies() {
        let mut rng = StreamRng::seed_from_u64(1);
        let (a, b) = (ch("1100"), ch("0011"));
        for _ in 0..50 {
            assert_eq!(
                two_point_crossover(&a, &b, 0.0, &mut rng),
                (a.clone(), b.clone())
            );
        }
    }

    #[test]
    fn random_cuts_are_proper_segments() {
        let mut rng = StreamRng::seed_from_u64(2);
        let (a, b) = (ch("1111111111"), ch("0000000000"));
        for _ in 0..500 {
            let (x, y) = two_point_crossover(&a, &b, 1.0, &mut rng);
            // exactly one contiguous run swapped, non-empty
            let zeros: Vec<usize> = (0..10).filter(|&i| !x.bits()[i]).collect();
            assert!(!zeros.is_empty());
            assert_eq!(zeros.last().unwrap() - zeros[0] + 1, zeros.len());
            assert_eq!(x.popcount() + y.popcount(), 10);
        }
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = StreamRng::seed_from_u64(3);
        let c = ch("1010011");
        assert_eq!(mutate(&c, 0.0, &mut rng), c);
        assert_eq!(mutate(&c, 1.0, &mut rng), ch("0101100"));
    }

    #[test]
    fn full_cardinality_init() {
        let mut rng = StreamRng::seed_from_u64(4);
        let w = WeightVector::uniform(5).unwrap();
        for c in init_population(&w, 5, 10, &mut rng).unwrap() {
            assert_eq!(c, ch("11111"));
        }
    }

    #[test]
    fn tournament_singleton_and_empty() {
        let mut rng = StreamRng::seed_from_u64(5);
        let pool = Population {
            individuals: vec![ch("0110")],
            fitness: vec![0.3],
        };
        let s = tournament_select(&pool, 4, 2, &mut rng).unwrap();
        assert!(s.individuals.iter().all(|c| c == &ch("0110")));
        let empty = Population {
            individuals: vec![],
            fitness: vec![],
        };
        assert!(matches!(
            tournament_select(&empty, 4, 2, &mut rng),
            Err(SearchError::EmptyPool)
        ));
    }

    #[test]
    fn tournament_tie_prefers_canonical_order() {
        let mut rng = StreamRng::seed_from_u64(6);
        let pool = Population {
            individuals: vec![ch("0011"), ch("1100")],
            fitness: vec![0.5, 0.5],
        };
        // With size 16 both entrants are drawn almost surely; {0,1} < {2,3}.
        let s = tournament_select(&pool, 50, 16, &mut rng).unwrap();
        assert!(s.individuals.iter().all(|c| c == &ch("1100")));
    }

    #[test]
    fn default_pair_count() {
        assert_eq!(default_pairs(12), 42);
        assert_eq!(default_pairs(20), 70);
        assert_eq!(default_pairs(5), 18);
    }

    #[test]
    fn config_validation() {
        let mut cfg = GaConfig::new(3, 0);
        assert!(cfg.validate(10).is_ok());
        cfg.n_fp = 1;
        assert!(cfg.validate(10).is_err());
        let mut cfg = GaConfig::new(3, 0);
        cfg.p_m = 1.5;
        assert!(cfg.validate(10).is_err());
        assert!(GaConfig::new(11, 0).validate(10).is_err());
    }
}
