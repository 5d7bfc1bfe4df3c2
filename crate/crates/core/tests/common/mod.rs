#![allow(dead_code)]

use ecoenum::enumerate::{collect_levels, make_enumerator, Algorithm, BucketSize, Level};
use ecoenum::grammar::{random_grammar, Grammar, RandomGrammarParams};
use ecoenum::oracle::{table_for_prefix, DEFAULT_MEMORY_CAP};
use ecoenum::terms::Term;

pub const CORPUS_SIZE: u64 = 120;
pub const PREFIX: usize = 500;

pub fn corpus() -> impl Iterator<Item = (u64, Grammar)> {
    (0..CORPUS_SIZE).map(|seed| (seed, random_grammar(seed, &RandomGrammarParams::default())))
}

fn sorted(mut v: Vec<Term>) -> Vec<Term> {
    v.sort();
    v
}

/// First mismatch between an algorithm's levels and the oracle's, over the
/// levels holding the first `n` start programs.
pub fn oracle_mismatch(g: &Grammar, algo: Algorithm, n: usize) -> Option<String> {
    let t = table_for_prefix(g, g.start(), n, DEFAULT_MEMORY_CAP).expect("oracle table");
    let s = g.start();
    let want = t.levels_covering(s, n).unwrap_or(t.num_levels(s));
    let mut e = make_enumerator(algo, g, BucketSize::default()).expect("enumerator");
    let got: Vec<Level> = collect_levels(e.as_mut(), n).expect("enumeration");
    if got.len() < want {
        return Some(format!("{algo}: {} levels, oracle has {want}", got.len()));
    }
    for (l, level) in got.iter().take(want).enumerate() {
        let (c, progs) = t.kth_level(s, l).expect("covered");
        if level.cost != c {
            return Some(format!("{algo}: level {l} cost {} vs oracle {}", level.cost, c));
        }
        if sorted(level.programs.clone()) != sorted(progs) {
            return Some(format!("{algo}: level {l} at cost {c} differs from oracle"));
        }
    }
    None
}
