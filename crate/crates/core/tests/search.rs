use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chansel::dgaff::{
    init_population, run_dgaff, tournament_select, Chromosome, GaConfig, Population,
};
use chansel::evaluator::{FnEvaluator, PlantedEvaluator};
use chansel::hics::{run_hics, HicsConfig};
use chansel::subsetselect::{select_final, tally_unique, GammaConfig};
use chansel::weightform::{build_weights, WeightVector};
use chansel::{ChannelSubset, EvalContext, EvalEngine, SubsetCache};

fn planted(members: &[usize], c: usize) -> PlantedEvaluator {
    PlantedEvaluator::new(
        ChannelSubset::new(members.iter().copied(), c).unwrap(),
        0.0,
        0,
    )
    .unwrap()
}

#[test]
fn hics_recovers_planted_members_and_counts_evaluations() {
    let (c, k) = (10, 4);
    let members = [2, 5, 7, 9];
    let ev = planted(&members, c);
    let ctx = EvalContext::synthetic(c);
    let cache = SubsetCache::new();
    let engine = EvalEngine::new(&ev, &ctx, &cache, 1).unwrap();
    let (subset, trace) = run_hics(&HicsConfig::new(k, c).unwrap(), &engine).unwrap();
    assert_eq!(subset.members(), &[2, 5, 7]);
    let expected: usize = (1..k).map(|l| c - l + 1).sum();
    assert_eq!(trace.evaluations(), expected);
    assert_eq!(cache.stats().invocations, expected);
}

fn arb_subset(c: usize) -> impl Strategy<Value = ChannelSubset> {
    proptest::collection::btree_set(0..c, 0..=c)
        .prop_map(move |s| ChannelSubset::new(s, c).unwrap())
}

proptest! {
    #[test]
    fn weights_sum_to_one_with_ratio_m(
        (c, sel) in (1usize..40).prop_flat_map(|c| (Just(c), arb_subset(c))),
        m in 1.0f64..10.0,
    ) {
        let w = build_weights(&sel, c, m).unwrap();
        let total: f64 = w.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        if !sel.is_empty() && sel.len() < c {
            let hi = w.weights()[sel.members()[0]];
            let lo = w.weights()[(0..c).find(|i| !sel.contains(*i)).unwrap()];
            prop_assert!((hi / lo - m).abs() <= 1e-12);
        }
    }

    #[test]
    fn weights_follow_channel_relabelling(
        (c, sel) in (1usize..20).prop_flat_map(|c| (Just(c), arb_subset(c))),
        seed in any::<u64>(),
    ) {
        let mut perm: Vec<usize> = (0..c).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let moved = ChannelSubset::new(sel.members().iter().map(|&i| perm[i]), c).unwrap();
        let a = build_weights(&sel, c, 2.0).unwrap();
        let b = build_weights(&moved, c, 2.0).unwrap();
        for (i, &j) in perm.iter().enumerate() {
            prop_assert_eq!(a.weights()[i], b.weights()[j]);
        }
    }

    #[test]
    fn tally_ignores_population_order(seed in any::<u64>(), gamma in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = WeightVector::uniform(6).unwrap();
        let individuals = init_population(&w, 3, 12, &mut rng).unwrap();
        let fitness: Vec<f64> = individuals
            .iter()
            .map(|c| c.to_subset().members().iter().sum::<usize>() as f64 / 15.0)
            .collect();
        let pop = Population { individuals, fitness };
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.shuffle(&mut rng);
        let shuffled = Population {
            individuals: order.iter().map(|&i| pop.individuals[i].clone()).collect(),
            fitness: order.iter().map(|&i| pop.fitness[i]).collect(),
        };
        let g = GammaConfig::new(gamma).unwrap();
        prop_assert_eq!(tally_unique(&pop), tally_unique(&shuffled));
        prop_assert_eq!(select_final(&tally_unique(&pop), &g).unwrap(), select_final(&tally_unique(&shuffled), &g).unwrap());
    }

    #[test]
    fn selection_changes_at_most_unique_minus_one_times(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = WeightVector::uniform(5).unwrap();
        let individuals = init_population(&w, 2, 20, &mut rng).unwrap();
        let fitness: Vec<f64> = individuals
            .iter()
            .map(|c| {
                let m = c.to_subset();
                ((m.members()[0] * 7 + m.members()[1] * 3) % 11) as f64 / 10.0
            })
            .collect();
        let t = tally_unique(&Population { individuals, fitness });
        let picks: Vec<ChannelSubset> = (0..=1000)
            .map(|i| select_final(&t, &GammaConfig::new(i as f64 / 1000.0).unwrap()).unwrap())
            .collect();
        let changes = picks.windows(2).filter(|p| p[0] != p[1]).count();
        prop_assert!(changes < t.entries.len());
    }
}

#[test]
fn uniform_single_channel_draws_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = WeightVector::uniform(4).unwrap();
    let draws = init_population(&w, 1, 100_000, &mut rng).unwrap();
    let mut counts = [0usize; 4];
    for c in &draws {
        counts[c.to_subset().members()[0]] += 1;
    }
    for n in counts {
        assert!((n as f64 / 1e5 - 0.25).abs() <= 0.02, "{counts:?}");
    }
}

#[test]
fn biased_channel_is_drawn_twice_as_often() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sel = ChannelSubset::new([0], 4).unwrap();
    let w = build_weights(&sel, 4, 2.0).unwrap();
    let draws = init_population(&w, 1, 100_000, &mut rng).unwrap();
    let mut counts = [0usize; 4];
    for c in &draws {
        counts[c.to_subset().members()[0]] += 1;
    }
    let others = counts[1..].iter().sum::<usize>() as f64 / 3.0;
    let ratio = counts[0] as f64 / others;
    assert!((ratio - 2.0).abs() <= 0.05, "{counts:?}");
}

#[test]
fn binary_tournament_picks_the_better_of_two_three_times_in_four() {
    let pool = Population {
        individuals: vec![
            Chromosome::parse("10").unwrap(),
            Chromosome::parse("01").unwrap(),
        ],
        fitness: vec![0.2, 0.8],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let out = tournament_select(&pool, 100_000, 2, &mut rng).unwrap();
    let better = out.fitness.iter().filter(|&&y| y == 0.8).count() as f64 / 1e5;
    assert!((better - 0.75).abs() <= 0.01, "{better}");
}

fn modular(c: usize) -> impl Fn(&ChannelSubset) -> f64 + Send + Sync {
    let total = (c * (c + 1) / 2) as f64;
    move |s: &ChannelSubset| s.members().iter().map(|&i| (i + 1) as f64).sum::<f64>() / total
}

#[test]
fn one_generation_without_operators_keeps_initial_subsets() {
    let c = 8;
    let ev = FnEvaluator::new("modular", modular(c));
    let ctx = EvalContext::synthetic(c);
    let cache = SubsetCache::new();
    let engine = EvalEngine::new(&ev, &ctx, &cache, 1).unwrap();
    let mut cfg = GaConfig::new(3, 11);
    cfg.n_g = 1;
    cfg.p_c = 0.0;
    cfg.p_m = 0.0;
    let r = run_dgaff(&cfg, &WeightVector::uniform(c).unwrap(), &engine).unwrap();
    let initial: BTreeSet<ChannelSubset> = r.snapshots[0]
        .individuals
        .iter()
        .map(Chromosome::to_subset)
        .collect();
    for s in r.population.individuals.iter().map(Chromosome::to_subset) {
        assert!(initial.contains(&s));
    }
}

#[test]
fn ga_is_deterministic_and_keeps_population_size() {
    let c = 12;
    let run = |seed: u64, threads: usize| {
        let ev = FnEvaluator::new("modular", modular(c));
        let ctx = EvalContext::synthetic(c);
        let cache = SubsetCache::new();
        let engine = EvalEngine::new(&ev, &ctx, &cache, threads).unwrap();
        let cfg = GaConfig::new(4, seed);
        let r = run_dgaff(&cfg, &WeightVector::uniform(c).unwrap(), &engine).unwrap();
        (r, cache.stats())
    };
    let (a, stats) = run(9, 1);
    let (b, _) = run(9, 4);
    assert_eq!(a.population, b.population);
    assert_eq!(a.generations, b.generations);
    assert_eq!(a.snapshots.len(), GaConfig::new(4, 9).n_g + 1);
    for p in &a.snapshots {
        assert_eq!(p.len(), GaConfig::new(4, 9).n_fp);
    }
    let distinct_valid: BTreeSet<ChannelSubset> = a
        .offspring
        .iter()
        .flat_map(|p| p.individuals.iter())
        .filter(|c| c.popcount() == 4)
        .map(Chromosome::to_subset)
        .collect();
    assert_eq!(stats.invocations, distinct_valid.len());
    assert_eq!(stats.distinct, distinct_valid.len());
}

#[test]
fn k_equal_to_c_is_all_ones() {
    let c = 5;
    let ev = FnEvaluator::new("modular", modular(c));
    let ctx = EvalContext::synthetic(c);
    let cache = SubsetCache::new();
    let engine = EvalEngine::new(&ev, &ctx, &cache, 1).unwrap();
    let r = run_dgaff(
        &GaConfig::new(c, 1),
        &WeightVector::uniform(c).unwrap(),
        &engine,
    )
    .unwrap();
    for ch in &r.population.individuals {
        assert_eq!(ch.popcount(), c);
    }
    assert_eq!(r.population.best().unwrap().1, 1.0);
}
