//! Brute-force reference enumeration by dynamic programming over costs.
//!
//! The programs of cost `c` at `X` are, for each rule `X -> f(X1..Xk)`, all
//! combinations of argument programs whose costs sum to `c - cost(r)`.
//! Costs are integer units, so the table is exact for every `c <= bound`.

use std::collections::HashMap;

use thiserror::Error;

use crate::costs::Cost;
use crate::grammar::{Grammar, Nt, RuleId};
use crate::terms::{ProgramId, ProgramStore, Term};

/// Default table budget in bytes.
pub const DEFAULT_MEMORY_CAP: usize = 2 << 30;

/// Approximate bytes per stored program and per child reference.
const NODE_BYTES: usize = 32;
const CHILD_BYTES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle table exceeds its memory cap of {cap} bytes at cost {at}")]
    MemoryCapExceeded { cap: usize, at: u64 },
    #[error("level {level} of `{nonterminal}` is beyond the table bound ({realized} levels realized)")]
    LevelBeyondBound {
        nonterminal: String,
        level: usize,
        realized: usize,
    },
}

/// All programs of every non-terminal up to a cost bound.
#[derive(Debug, Clone)]
pub struct CostTable {
    store: ProgramStore,
    /// `levels[x]`: ascending (cost, programs) pairs.
    levels: Vec<Vec<(Cost, Vec<ProgramId>)>>,
    by_cost: Vec<HashMap<u64, usize>>,
    bound: Cost,
    names: Vec<String>,
}

impl CostTable {
    pub fn bound(&self) -> Cost {
        self.bound
    }

    pub fn store(&self) -> &ProgramStore {
        &self.store
    }

    pub fn total_programs(&self) -> usize {
        self.store.len()
    }

    /// Ascending realized costs of `x`.
    pub fn level_costs(&self, x: Nt) -> Vec<Cost> {
        self.levels[x.index()].iter().map(|(c, _)| *c).collect()
    }

    pub fn num_levels(&self, x: Nt) -> usize {
        self.levels[x.index()].len()
    }

    /// Programs of `x` at its `level`-th smallest cost.
    pub fn kth_level(&self, x: Nt, level: usize) -> Result<(Cost, Vec<Term>), OracleError> {
        let (c, ids) = self.level_ids(x, level)?;
        Ok((c, ids.iter().map(|&p| self.store.to_term(p)).collect()))
    }

    pub fn level_ids(&self, x: Nt, level: usize) -> Result<(Cost, &[ProgramId]), OracleError> {
        self.levels[x.index()]
            .get(level)
            .map(|(c, ids)| (*c, ids.as_slice()))
            .ok_or_else(|| OracleError::LevelBeyondBound {
                nonterminal: self.names[x.index()].clone(),
                level,
                realized: self.levels[x.index()].len(),
            })
    }

    /// Programs of `x` with cost exactly `c`.
    pub fn programs_at(&self, x: Nt, c: Cost) -> Vec<Term> {
        self.by_cost[x.index()]
            .get(&c.0)
            .map(|&i| self.levels[x.index()][i].1.iter().map(|&p| self.store.to_term(p)).collect())
            .unwrap_or_default()
    }

    /// Smallest number of leading levels of `x` holding at least `n`
    /// programs, or `None` if the table holds fewer.
    pub fn levels_covering(&self, x: Nt, n: usize) -> Option<usize> {
        let mut seen = 0;
        for (i, (_, ids)) in self.levels[x.index()].iter().enumerate() {
            seen += ids.len();
            if seen >= n {
                return Some(i + 1);
            }
        }
        None
    }
}

/// Tabulates every program of cost at most `bound`.
pub fn enumerate_upto_cost(g: &Grammar, bound: Cost) -> Result<CostTable, OracleError> {
    enumerate_with_cap(g, bound, DEFAULT_MEMORY_CAP)
}

pub fn enumerate_with_cap(g: &Grammar, bound: Cost, cap: usize) -> Result<CostTable, OracleError> {
    fill(g, bound, cap, &vec![true; g.num_nonterminals()], |_, _| false)
}

/// Tabulates costs `1, 2, ..` up to `bound` for the `live` non-terminals,
/// stopping early once `done` holds for the table complete up to the
/// current cost.
fn fill(
    g: &Grammar,
    bound: Cost,
    cap: usize,
    live: &[bool],
    mut done: impl FnMut(&CostTable, u64) -> bool,
) -> Result<CostTable, OracleError> {
    let n = g.num_nonterminals();
    let mut t = CostTable {
        store: ProgramStore::new(),
        levels: vec![Vec::new(); n],
        by_cost: vec![HashMap::new(); n],
        bound,
        names: g.nonterminals().map(|x| g.nt_name(x).to_string()).collect(),
    };
    let mut fresh: Vec<Vec<ProgramId>> = vec![Vec::new(); n];
    for c in 1..=bound.0 {
        for rule in g.rules() {
            if rule.cost.0 > c || !live[rule.lhs.index()] {
                continue;
            }
            let rest = c - rule.cost.0;
            if rule.rhs.is_empty() {
                if rest == 0 {
                    let p = t.store.add(rule.id, &[], Cost(c));
                    fresh[rule.lhs.index()].push(p);
                }
                continue;
            }
            for parts in compositions(&t, &rule.rhs, rest) {
                products(&mut t, rule.id, &rule.rhs, &parts, Cost(c), &mut fresh[rule.lhs.index()]);
                if t.store.len() * (NODE_BYTES + CHILD_BYTES) > cap {
                    return Err(OracleError::MemoryCapExceeded { cap, at: c });
                }
            }
        }
        for (x, ps) in fresh.iter_mut().enumerate() {
            if ps.is_empty() {
                continue;
            }
            t.by_cost[x].insert(c, t.levels[x].len());
            t.levels[x].push((Cost(c), std::mem::take(ps)));
        }
        if done(&t, c) {
            t.bound = Cost(c);
            break;
        }
    }
    Ok(t)
}

/// Level indices, one per argument, whose costs sum to `rest`. Only
/// levels already in the table (all strictly cheaper than the cost being
/// built) are used.
fn compositions(t: &CostTable, args: &[Nt], rest: u64) -> Vec<Vec<usize>> {
    fn go(t: &CostTable, args: &[Nt], rest: u64, split: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
        let i = split.len();
        let x = args[i].index();
        if i + 1 == args.len() {
            if let Some(&lvl) = t.by_cost[x].get(&rest) {
                split.push(lvl);
                found.push(split.clone());
                split.pop();
            }
            return;
        }
        for (lvl, (c, _)) in t.levels[x].iter().enumerate() {
            if c.0 >= rest {
                break;
            }
            split.push(lvl);
            go(t, args, rest - c.0, split, found);
            split.pop();
        }
    }
    let mut found = Vec::new();
    go(t, args, rest, &mut Vec::with_capacity(args.len()), &mut found);
    found
}

fn products(t: &mut CostTable, rule: RuleId, args: &[Nt], parts: &[usize], c: Cost, out: &mut Vec<ProgramId>) {
    let lists: Vec<Vec<ProgramId>> = args
        .iter()
        .zip(parts)
        .map(|(x, &l)| t.levels[x.index()][l].1.clone())
        .collect();
    let mut idx = vec![0usize; lists.len()];
    let mut children = vec![ProgramId(0); lists.len()];
    loop {
        for (i, l) in lists.iter().enumerate() {
            children[i] = l[idx[i]];
        }
        out.push(t.store.add(rule, &children, c));
        let mut i = lists.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Table that covers at least the first `n` programs of `x` (or all of
/// them for a finite language), complete up to the cost of the `n`-th one.
/// Only non-terminals reachable from `x` are filled.
pub fn table_for_prefix(g: &Grammar, x: Nt, n: usize, cap: usize) -> Result<CostTable, OracleError> {
    let infinite = g.infinite_nonterminals();
    let live = g.reachable_from(x);
    if !infinite[x.index()] {
        let max = crate::costs::finite_max_costs(g, &infinite)[x.index()].expect("finite");
        return fill(g, Cost(max), cap, &live, |_, _| false);
    }
    let mut count = 0;
    let mut seen_levels = 0;
    fill(g, Cost(u64::MAX), cap, &live, |t, _| {
        for (_, ids) in &t.levels[x.index()][seen_levels..] {
            count += ids.len();
        }
        seen_levels = t.levels[x.index()].len();
        count >= n
    })
}
