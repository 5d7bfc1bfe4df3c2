//! Successor-gap estimation.
//!
//! For each non-terminal `X` the realized costs `{cost(p) : p from X}` are
//! computed exactly up to a bound by dynamic programming over costs. The
//! largest difference between adjacent realized costs is the gap. Once the
//! prefix covers, for every `X`, a cost above the most expensive program of
//! `X` that repeats no non-terminal along a path, every successor gap of the
//! whole language already occurs in the prefix and the estimate is exact.

use std::collections::HashMap;

use super::Cost;
use crate::grammar::Grammar;

/// Largest cost bound probed by default.
pub const DEFAULT_PROBE_BUDGET: u64 = 4096;

/// Bitmask search for the repetition-free maximum is skipped above this
/// many non-terminals.
const MAX_MASK_NONTERMINALS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMethod {
    /// The probed prefix provably contains the largest successor gap.
    ExactOracle,
    /// Largest gap seen in the probed prefix; a sizing hint only.
    EmpiricalSample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapEstimate {
    /// Largest adjacent realized-cost gap over all non-terminals.
    pub m_hat: Cost,
    pub method: GapMethod,
    /// Number of distinct (non-terminal, cost) pairs inspected.
    pub sample_size: usize,
    /// Costs up to this bound were probed.
    pub bound: Cost,
    /// Largest adjacent gap per non-terminal.
    pub per_nonterminal: Vec<Cost>,
    /// Key spread of each freshly initialised per-non-terminal queue.
    pub initial_spread: Vec<Cost>,
}

impl GapEstimate {
    /// Bound on the key spread of any per-non-terminal queue: popping the
    /// minimum and pushing its successors never opens a gap wider than
    /// `m_hat`, so the spread never exceeds the larger of `m_hat` and the
    /// spread at initialisation.
    pub fn spread_bound(&self) -> Cost {
        let init = self.initial_spread.iter().copied().max().unwrap_or(Cost::ZERO);
        self.m_hat.max(init)
    }

    /// Number of buckets: one per possible key offset when the spread
    /// bound is below 1000, else `fallback`.
    pub fn bucket_size(&self, fallback: usize) -> usize {
        let m = self.spread_bound().0;
        if m < 1000 {
            m as usize + 1
        } else {
            fallback.max(1)
        }
    }
}

/// Realized costs per non-terminal up to `bound`, ascending.
pub fn realized_costs(g: &Grammar, bound: u64) -> Vec<Vec<u64>> {
    RealizedDp::new(g).run(bound, |_| false)
}

struct RealizedDp<'g> {
    g: &'g Grammar,
    /// `realized[x][c]`
    realized: Vec<Vec<bool>>,
    lists: Vec<Vec<u64>>,
    /// `suffix[r][i][s]`: some choice of argument costs at positions
    /// `i..k` of rule `r` sums to `s`. Position `k` holds only `s = 0`.
    suffix: Vec<Vec<Vec<bool>>>,
}

impl<'g> RealizedDp<'g> {
    fn new(g: &'g Grammar) -> Self {
        let n = g.num_nonterminals();
        let suffix = g
            .rules()
            .iter()
            .map(|r| {
                let mut levels = vec![Vec::new(); r.rhs.len() + 1];
                levels[r.rhs.len()].push(true);
                levels
            })
            .collect();
        RealizedDp {
            g,
            realized: vec![vec![false]; n],
            lists: vec![Vec::new(); n],
            suffix,
        }
    }

    /// Extends the tables cost by cost until `bound` or until `stop`
    /// returns true after a step.
    fn run(mut self, bound: u64, mut stop: impl FnMut(&Self) -> bool) -> Vec<Vec<u64>> {
        for c in 1..=bound {
            self.step(c);
            if stop(&self) {
                break;
            }
        }
        self.lists
    }

    fn step(&mut self, c: u64) {
        let g = self.g;
        for x in self.realized.iter_mut() {
            x.push(false);
        }
        for rule in g.rules() {
            let x = rule.lhs.index();
            if self.realized[x][c as usize] || rule.cost.0 > c {
                continue;
            }
            let s = (c - rule.cost.0) as usize;
            let hit = if rule.rhs.is_empty() {
                s == 0
            } else {
                self.suffix[rule.id.index()][0].get(s).copied().unwrap_or(false)
            };
            if hit {
                self.realized[x][c as usize] = true;
            }
        }
        for x in 0..self.realized.len() {
            if self.realized[x][c as usize] {
                self.lists[x].push(c);
            }
        }
        // suffix sums at s = c use realized costs up to c, all known now
        let s = c as usize;
        for rule in g.rules() {
            let k = rule.rhs.len();
            let levels = &mut self.suffix[rule.id.index()];
            if levels[k].len() <= s {
                levels[k].push(false);
            }
            for i in (0..k).rev() {
                let arg = rule.rhs[i].index();
                let next = &levels[i + 1];
                let hit = self.lists[arg]
                    .iter()
                    .take_while(|&&t| t as usize <= s)
                    .any(|&t| next.get(s - t as usize).copied().unwrap_or(false));
                let lvl = &mut levels[i];
                while lvl.len() < s {
                    lvl.push(false);
                }
                lvl.push(hit);
            }
        }
    }
}

/// Most expensive program of each non-terminal in which no non-terminal
/// repeats along a root-to-leaf path, or `None` when the grammar is too
/// large for the bitmask search.
fn repetition_free_max(g: &Grammar) -> Option<Vec<u64>> {
    let n = g.num_nonterminals();
    if n > MAX_MASK_NONTERMINALS {
        return None;
    }
    fn best(g: &Grammar, x: usize, mask: u32, memo: &mut HashMap<(usize, u32), Option<u64>>) -> Option<u64> {
        if let Some(&v) = memo.get(&(x, mask)) {
            return v;
        }
        let inner = mask | (1 << x);
        let mut out: Option<u64> = None;
        'rules: for &r in g.rules_for(crate::grammar::Nt(x as u32)) {
            let rule = g.rule(r);
            let mut total = rule.cost.0;
            for a in &rule.rhs {
                if inner & (1 << a.index()) != 0 {
                    continue 'rules;
                }
                match best(g, a.index(), inner, memo) {
                    Some(v) => total += v,
                    None => continue 'rules,
                }
            }
            out = Some(out.map_or(total, |o| o.max(total)));
        }
        memo.insert((x, mask), out);
        out
    }
    let mut memo = HashMap::new();
    Some((0..n).map(|x| best(g, x, 0, &mut memo).unwrap_or(0)).collect())
}

/// Largest program cost of each non-terminal with a finite language.
pub(crate) fn finite_max(g: &Grammar, infinite: &[bool]) -> Vec<Option<u64>> {
    fn go(g: &Grammar, x: usize, infinite: &[bool], memo: &mut Vec<Option<Option<u64>>>) -> Option<u64> {
        if infinite[x] {
            return None;
        }
        if let Some(v) = memo[x] {
            return v;
        }
        let mut out = 0;
        for &r in g.rules_for(crate::grammar::Nt(x as u32)) {
            let rule = g.rule(r);
            let mut total = rule.cost.0;
            for a in &rule.rhs {
                total += go(g, a.index(), infinite, memo).expect("finite languages only reach finite ones");
            }
            out = out.max(total);
        }
        memo[x] = Some(Some(out));
        Some(out)
    }
    let mut memo = vec![None; g.num_nonterminals()];
    (0..g.num_nonterminals()).map(|x| go(g, x, infinite, &mut memo)).collect()
}

fn initial_spreads(g: &Grammar) -> Vec<Cost> {
    let Ok(mp) = g.compute_min_programs() else {
        return vec![Cost::ZERO; g.num_nonterminals()];
    };
    g.nonterminals()
        .map(|x| {
            let keys = g.rules_for(x).iter().map(|&r| {
                let rule = g.rule(r);
                rule.cost.0 + rule.rhs.iter().map(|&a| mp.cost(a).0).sum::<u64>()
            });
            let (lo, hi) = keys.fold((u64::MAX, 0), |(lo, hi), k| (lo.min(k), hi.max(k)));
            Cost(hi.saturating_sub(lo))
        })
        .collect()
}

/// Estimates the successor-gap constant by probing realized costs up to
/// `probe_budget`.
pub fn estimate_successor_gap(g: &Grammar, probe_budget: u64) -> GapEstimate {
    let infinite = g.infinite_nonterminals();
    let fin = finite_max(g, &infinite);
    let rep_free = repetition_free_max(g);
    let n = g.num_nonterminals();

    // covered[x]: the prefix reaches past every cost that matters for x
    let covered = |dp: &RealizedDp<'_>, c: u64, x: usize| match fin[x] {
        Some(max) => c >= max,
        None => match &rep_free {
            Some(f) => dp.lists[x].last().is_some_and(|&last| last > f[x]),
            None => false,
        },
    };
    let mut last_c = 0;
    let mut exact = false;
    let lists = RealizedDp::new(g).run(probe_budget, |dp| {
        last_c += 1;
        exact = (0..n).all(|x| covered(dp, last_c, x));
        exact
    });

    let per_nonterminal: Vec<Cost> = lists
        .iter()
        .map(|l| Cost(l.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)))
        .collect();
    GapEstimate {
        m_hat: per_nonterminal.iter().copied().max().unwrap_or(Cost::ZERO),
        method: if exact {
            GapMethod::ExactOracle
        } else {
            GapMethod::EmpiricalSample
        },
        sample_size: lists.iter().map(Vec::len).sum(),
        bound: Cost(last_c),
        per_nonterminal,
        initial_spread: initial_spreads(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostMode;
    use crate::grammar::{make_family, running_example, CostAssignment, Family, GrammarBuilder};

    #[test]
    fn realized_costs_of_running_example() {
        let g = running_example(CostMode::integer());
        let costs = realized_costs(&g, 84);
        let expected: Vec<u64> = (1..=84).filter(|&c| realized_by_brute_force(c)).collect();
        assert_eq!(costs[0], expected);
        assert_eq!(&costs[0][..6], &[11, 20, 62, 75, 77, 84]);
        assert_eq!(costs[1], vec![18, 33]);
    }

    /// str costs: sums of 11/20 (constants), 44 + int, 53 + str + str.
    fn realized_by_brute_force(c: u64) -> bool {
        fn int(c: u64) -> bool {
            c == 18 || c == 33 || (c > 53 && (1..c - 53).any(|a| int(a) && int(c - 53 - a)))
        }
        fn str_(c: u64) -> bool {
            c == 11
                || c == 20
                || (c > 44 && int(c - 44))
                || (c > 53 && (1..c - 53).any(|a| str_(a) && str_(c - 53 - a)))
        }
        str_(c)
    }

    #[test]
    fn single_constant_has_zero_gap() {
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.start("S").rule("S", "a", &[], Cost(5));
        let est = estimate_successor_gap(&b.build(), DEFAULT_PROBE_BUDGET);
        assert_eq!(est.m_hat, Cost(0));
        assert_eq!(est.method, GapMethod::ExactOracle);
        assert_eq!(est.bucket_size(20), 1);
    }

    #[test]
    fn d2_uniform_is_contiguous() {
        let g = make_family(Family::D, 2, &CostAssignment::Uniform(1)).unwrap();
        let est = estimate_successor_gap(&g, DEFAULT_PROBE_BUDGET);
        assert_eq!(est.m_hat, Cost(1));
        assert_eq!(est.method, GapMethod::ExactOracle);
        // f(S,S) starts at 3 while h starts at 1
        assert_eq!(est.spread_bound(), Cost(2));
        let costs = realized_costs(&g, 30);
        assert_eq!(costs[0], (1..=30).collect::<Vec<_>>());
    }

    #[test]
    fn running_example_gap_matches_realized_prefix() {
        let g = running_example(CostMode::integer());
        let est = estimate_successor_gap(&g, DEFAULT_PROBE_BUDGET);
        assert_eq!(est.method, GapMethod::ExactOracle);
        let costs = realized_costs(&g, 2000);
        for (x, l) in costs.iter().enumerate() {
            let widest = l.windows(2).map(|w| w[1] - w[0]).max().unwrap();
            assert!(widest <= est.m_hat.0, "nonterminal {x}: {widest} > {}", est.m_hat);
        }
        // str: 11 -> 20 -> 62 and int: 18 -> 33 -> 36
        assert_eq!(est.per_nonterminal[0], Cost(42));
    }

    #[test]
    fn small_budget_is_empirical() {
        let g = make_family(Family::N, 3, &CostAssignment::seeded(4)).unwrap();
        let est = estimate_successor_gap(&g, 5);
        assert_eq!(est.method, GapMethod::EmpiricalSample);
        assert_eq!(est.bound, Cost(5));
    }
}
