//! Parametric benchmark grammars and random grammars for testing.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grammar, GrammarBuilder, GrammarError};
use crate::costs::{Cost, CostMode};

/// The three scaling families: `D` varies the number of rules, `N` the
/// number of non-terminals, `R` the distance to the start non-terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    D,
    N,
    R,
}

impl Family {
    pub fn min_k(self) -> usize {
        match self {
            Family::D | Family::N => 1,
            Family::R => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::D => "D",
            Family::N => "N",
            Family::R => "R",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "D" | "d" => Ok(Family::D),
            "N" | "n" => Ok(Family::N),
            "R" | "r" => Ok(Family::R),
            other => Err(format!("unknown grammar family `{other}` (expected D, N or R)")),
        }
    }
}

/// How rule costs of a generated family are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostAssignment {
    Uniform(u64),
    /// Integer costs drawn uniformly from `lo..=hi`, in rule order.
    SeededRandom { lo: u64, hi: u64, seed: u64 },
}

impl CostAssignment {
    pub fn seeded(seed: u64) -> Self {
        CostAssignment::SeededRandom { lo: 1, hi: 100, seed }
    }

    fn costs(&self, n: usize) -> Vec<Cost> {
        match *self {
            CostAssignment::Uniform(c) => vec![Cost(c); n],
            CostAssignment::SeededRandom { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| Cost(rng.gen_range(lo..=hi))).collect()
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            CostAssignment::Uniform(_) => None,
            CostAssignment::SeededRandom { seed, .. } => Some(seed),
        }
    }
}

/// Builds `D_k`, `N_k` or `R_k` with integer costs. In `R_k` the neighbour
/// indices wrap around (`S_0 = S_k`, `S_{k+1} = S_1`).
pub fn make_family(family: Family, k: usize, costs: &CostAssignment) -> Result<Grammar, GrammarError> {
    if k < family.min_k() {
        return Err(GrammarError::InvalidK {
            family,
            k,
            min: family.min_k(),
        });
    }
    if let CostAssignment::SeededRandom { lo, hi, .. } = *costs {
        if lo == 0 || lo > hi {
            return Err(GrammarError::Other(format!("invalid cost range {lo}..={hi}")));
        }
    }
    if let CostAssignment::Uniform(0) = *costs {
        return Err(GrammarError::Other("uniform cost must be positive".into()));
    }

    // (lhs, primitive, rhs)
    let mut shape: Vec<(String, String, Vec<String>)> = Vec::new();
    let s = |i: usize| format!("S{i}");
    match family {
        Family::D => {
            for i in 1..=k {
                shape.push(("S".into(), format!("f{i}"), vec!["S".into(), "S".into()]));
                shape.push(("S".into(), format!("g{i}"), vec!["S".into()]));
                shape.push(("S".into(), format!("h{i}"), vec![]));
            }
        }
        Family::N => {
            for i in 1..=k {
                shape.push((s(1), format!("f{i}"), vec![s(i)]));
                shape.push((s(i), format!("g{i}"), vec![s(1)]));
                shape.push((s(i), format!("h{i}"), vec![]));
            }
        }
        Family::R => {
            for i in 1..=k {
                let prev = if i == 1 { k } else { i - 1 };
                let next = if i == k { 1 } else { i + 1 };
                shape.push((s(i), format!("f{i}"), vec![s(prev), s(i), s(next)]));
                shape.push((s(i), format!("g{i}"), vec![s(1), s(i)]));
                shape.push((s(1), format!("h{i}"), vec![s(i)]));
                shape.push((s(i), format!("k{i}"), vec![]));
            }
        }
    }

    let costs = costs.costs(shape.len());
    let mut b = GrammarBuilder::new(CostMode::integer());
    b.start(if family == Family::D { "S" } else { "S1" });
    if family != Family::D {
        for i in 1..=k {
            b.nonterminal(&s(i));
        }
    }
    for ((lhs, prim, rhs), c) in shape.iter().zip(costs) {
        let rhs: Vec<&str> = rhs.iter().map(String::as_str).collect();
        b.rule(lhs, prim, &rhs, c);
    }
    Ok(b.build())
}

/// Shape limits for [`random_grammar`].
#[derive(Debug, Clone, Copy)]
pub struct RandomGrammarParams {
    pub max_rules: usize,
    pub max_nonterminals: usize,
    pub max_arity: usize,
    pub cost_lo: u64,
    pub cost_hi: u64,
}

impl Default for RandomGrammarParams {
    fn default() -> Self {
        RandomGrammarParams {
            max_rules: 12,
            max_nonterminals: 4,
            max_arity: 2,
            cost_lo: 1,
            cost_hi: 50,
        }
    }
}

/// A productive, deterministic random grammar with integer costs. Every rule
/// gets its own primitive `p<i>`.
pub fn random_grammar(seed: u64, params: &RandomGrammarParams) -> Grammar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_nt = rng.gen_range(1..=params.max_nonterminals.max(1));
        let n_rules = rng.gen_range(n_nt.max(2)..=params.max_rules.max(n_nt.max(2)));
        let name = |i: usize| format!("X{i}");
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.start(&name(0));
        for i in 0..n_nt {
            b.nonterminal(&name(i));
        }
        let mut next_prim = 0;
        let cost = |rng: &mut ChaCha8Rng| Cost(rng.gen_range(params.cost_lo..=params.cost_hi));
        // one constant for the start, then random rules
        let c = cost(&mut rng);
        b.rule(&name(0), &format!("p{next_prim}"), &[], c);
        next_prim += 1;
        while b.num_rules() < n_rules {
            let lhs = rng.gen_range(0..n_nt);
            let arity = match rng.gen_range(0..10) {
                0..=2 => 0,
                3..=6 => 1.min(params.max_arity),
                7..=8 => 2.min(params.max_arity),
                _ => params.max_arity,
            };
            let rhs: Vec<String> = (0..arity).map(|_| name(rng.gen_range(0..n_nt))).collect();
            let rhs: Vec<&str> = rhs.iter().map(String::as_str).collect();
            let c = cost(&mut rng);
            b.rule(&name(lhs), &format!("p{next_prim}"), &rhs, c);
            next_prim += 1;
        }
        let g = b.build();
        if g.validate().is_ok() {
            return g;
        }
    }
}
