//! Property tests over random grammars outside the fixed corpus.

mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use ecoenum::bench::{measure_delay, BLOCK_SIZE};
use ecoenum::costs::{estimate_successor_gap, program_cost, Cost, CostMode, GapMethod, DEFAULT_PROBE_BUDGET};
use ecoenum::enumerate::{make_enumerator, take_programs, Algorithm, BucketSize, EcoConfig, EcoSearch, Enumerator};
use ecoenum::grammar::{
    load_grammar, make_family, random_grammar, save_grammar, CostAssignment, Family, Grammar, RandomGrammarParams,
};
use ecoenum::oracle::{table_for_prefix, DEFAULT_MEMORY_CAP};
use ecoenum::pbe::{self, Budget, SolveOptions};
use ecoenum::terms::Term;

fn grammar(seed: u64) -> Grammar {
    random_grammar(seed, &RandomGrammarParams::default())
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_grammars_are_deterministic_and_save_round_trips(seed in 1000u64..1_000_000) {
        let g = grammar(seed);
        let mut keys = HashSet::new();
        for r in g.rules() {
            prop_assert!(keys.insert((r.lhs, r.primitive)));
        }
        let back = load_grammar(&save_grammar(&g), CostMode::integer()).unwrap();
        prop_assert_eq!(save_grammar(&back), save_grammar(&g));
    }

    #[test]
    fn min_costs_match_the_oracle(seed in 1000u64..1_000_000) {
        let g = grammar(seed);
        let min = g.compute_min_programs().unwrap();
        for x in g.nonterminals() {
            prop_assert_eq!(program_cost(min.program(x), &g).unwrap(), min.cost(x));
            let t = table_for_prefix(&g.with_start(x), x, 1, DEFAULT_MEMORY_CAP).unwrap();
            prop_assert_eq!(t.level_costs(x)[0], min.cost(x));
        }
    }

    #[test]
    fn enumerators_agree_with_the_oracle(seed in 1000u64..1_000_000) {
        let g = grammar(seed);
        for algo in Algorithm::ALL {
            prop_assert_eq!(common::oracle_mismatch(&g, algo, 200), None);
        }
    }

    #[test]
    fn output_is_best_first_unique_and_cost_compositional(seed in 1000u64..1_000_000, algo in 0usize..4) {
        let g = grammar(seed);
        let algo = Algorithm::ALL[algo];
        let mut e = make_enumerator(algo, &g, BucketSize::default()).unwrap();
        let progs = take_programs(e.as_mut(), 500).unwrap();
        let mut seen = HashSet::new();
        for w in progs.windows(2) {
            prop_assert!(w[0].1 <= w[1].1);
        }
        for (t, c) in &progs {
            prop_assert!(seen.insert(t.clone()), "duplicate {}", t.render(&g));
            prop_assert_eq!(program_cost(t, &g).unwrap(), *c);
            let kids: u64 = t.children.iter().map(|k| program_cost(k, &g).unwrap().0).sum();
            prop_assert_eq!(c.0 - kids, g.rule(t.rule).cost.0);
        }
    }

    #[test]
    fn same_seed_same_sequence(seed in 1000u64..1_000_000, algo in 0usize..4) {
        let g = grammar(seed);
        let algo = Algorithm::ALL[algo];
        let run = || {
            let mut e = make_enumerator(algo, &g, BucketSize::default()).unwrap();
            take_programs(e.as_mut(), 300).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn eco_spread_and_frugal_bounds(seed in 1000u64..1_000_000) {
        let g = grammar(seed);
        let mut e = EcoSearch::new(&g, EcoConfig::default()).unwrap();
        let est = e.gap_estimate().unwrap().clone();
        let mut out = Vec::new();
        while out.len() < 1000 && e.next_batch(&mut out).unwrap().is_some() {}
        if est.method == GapMethod::ExactOracle {
            for x in g.nonterminals() {
                prop_assert!(e.max_spread(x) <= est.spread_bound());
                prop_assert_eq!(e.queue_stats(x).overflow_pushes, 0);
            }
        }
        prop_assert!(e.max_mutations_per_level().iter().all(|&m| m <= 1));
    }

    #[test]
    fn estimated_gap_bounds_realized_gaps(seed in 1000u64..1_000_000) {
        let g = grammar(seed);
        let est = estimate_successor_gap(&g, DEFAULT_PROBE_BUDGET);
        let t = table_for_prefix(&g, g.start(), 300, DEFAULT_MEMORY_CAP).unwrap();
        if est.method == GapMethod::ExactOracle {
            for x in g.nonterminals() {
                for w in t.level_costs(x).windows(2) {
                    prop_assert!(w[1].0 - w[0].0 <= est.m_hat.0);
                }
            }
        }
    }

    #[test]
    fn family_sizes(k in 2usize..40, seed in 0u64..1000) {
        let c = CostAssignment::seeded(seed);
        prop_assert_eq!(make_family(Family::D, k, &c).unwrap().rules().len(), 3 * k);
        prop_assert_eq!(make_family(Family::N, k, &c).unwrap().num_nonterminals(), k);
        prop_assert_eq!(make_family(Family::R, k, &c).unwrap().rules().len(), 4 * k);
    }

    #[test]
    fn evaluation_is_total(n in 0usize..3000, task in 0usize..26) {
        // every enumerated program evaluates to a value or an error value
        let tasks = pbe::parse_tasks(pbe::BUNDLED_TASKS).unwrap();
        let task = &tasks[task % tasks.len()];
        let tg = task.grammar(CostMode::integer()).unwrap();
        let mut e = make_enumerator(Algorithm::Eco, &tg.grammar, BucketSize::default()).unwrap();
        let progs = take_programs(e.as_mut(), n + 1).unwrap();
        let (t, _): &(Term, Cost) = progs.last().unwrap();
        let sig = pbe::obs_signature(t, &tg, task, pbe::DEFAULT_FUEL);
        prop_assert_eq!(sig.len(), task.examples.len());
    }
}

#[test]
fn pruning_keeps_the_optimal_cost() {
    for task in pbe::parse_tasks(pbe::BUNDLED_TASKS).unwrap() {
        let solve = |prune| {
            let opts = SolveOptions { prune, ..SolveOptions::default() };
            pbe::solve(&task, Algorithm::Eco, Budget::default(), opts).unwrap().solution.map(|s| s.cost)
        };
        assert_eq!(solve(true), solve(false), "{}", task.name);
    }
}

#[test]
fn eco_work_per_program_does_not_grow() {
    // cumulative queue work over n programs stays within C * n: the work
    // per program after ten blocks is no more than 5% above the first
    for seed in 0..3 {
        let g = make_family(Family::D, 8, &CostAssignment::seeded(seed)).unwrap();
        let r = measure_delay(&g, Algorithm::Eco, BucketSize::default(), 10 * BLOCK_SIZE, BLOCK_SIZE).unwrap();
        let first = r.sample.blocks[0].queue_ops as f64;
        let all: u64 = r.sample.blocks.iter().map(|b| b.queue_ops).sum();
        assert!(all as f64 / 10.0 <= first * 1.05, "seed {seed}: {all} over 10 blocks vs {first} in the first");
    }
}
