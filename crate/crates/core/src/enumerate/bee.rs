//! Bee Search: one global queue of cost tuples over one global list of
//! realized costs.
//!
//! Level `n` of `index2cost` is the `n`-th smallest cost of a program from
//! any non-terminal; `generated[n][X]` holds the programs of `X` at that
//! cost. A tuple `(r, n)` stands for `f(p_1..p_k)` with `p_i` drawn from
//! `generated[n_i][X_i]`; the generated-by test therefore reduces to picking
//! the `X_i` slot.

use std::collections::HashSet;

use super::{CostTuple, EnumError, EnumStats, Enumerator};
use crate::costs::Cost;
use crate::grammar::{Grammar, Nt};
use crate::queues::{BinaryQueue, KeyedQueue};
use crate::terms::{ProgramId, ProgramStore};

/// Result of one pop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeeStep {
    pub tuple: CostTuple,
    pub cost: Cost,
    /// Programs built from the tuple, at any non-terminal.
    pub programs: Vec<ProgramId>,
}

pub struct BeeSearch {
    g: Grammar,
    store: ProgramStore,
    index2cost: Vec<Cost>,
    /// `generated[level][x]`
    generated: Vec<Vec<Vec<ProgramId>>>,
    queue: BinaryQueue<CostTuple>,
    members: HashSet<CostTuple>,
    /// Most expensive program of a finite start language. Empty tuples keep
    /// opening new levels forever, so past this cost the search stops.
    horizon: Option<Cost>,
    stats: EnumStats,
}

impl BeeSearch {
    pub fn new(g: &Grammar) -> Result<Self, EnumError> {
        g.ensure_valid()?;
        let min = g.compute_min_programs()?;
        // other non-terminals never feed the start and may not even end
        let live = g.reachable_from(g.start());
        let c = g
            .nonterminals()
            .filter(|x| live[x.index()])
            .map(|x| min.cost(x))
            .min()
            .expect("the start is live");
        let infinite = g.infinite_nonterminals();
        let horizon = (!infinite[g.start().index()]).then(|| {
            let max = crate::costs::finite_max_costs(g, &infinite);
            g.nonterminals()
                .filter(|x| live[x.index()])
                .map(|x| Cost(max[x.index()].expect("live non-terminals of a finite start are finite")))
                .max()
                .expect("the start is live")
        });
        let mut s = BeeSearch {
            g: g.clone(),
            store: ProgramStore::new(),
            index2cost: vec![c],
            generated: vec![vec![Vec::new(); g.num_nonterminals()]],
            queue: BinaryQueue::new(),
            members: HashSet::new(),
            horizon,
            stats: EnumStats::default(),
        };
        for rule in g.rules().iter().filter(|r| live[r.lhs.index()]) {
            let k = rule.rhs.len() as u64;
            let t = CostTuple::zeros(rule.id, rule.rhs.len());
            s.members.insert(t.clone());
            s.queue.push(t, rule.cost.0 + k * c.0)?;
        }
        Ok(s)
    }

    pub fn index2cost(&self) -> &[Cost] {
        &self.index2cost
    }

    /// Queue contents in pop order.
    pub fn queue_snapshot(&self) -> Vec<(CostTuple, Cost)> {
        let mut q = self.queue.clone();
        std::iter::from_fn(|| q.pop()).map(|(t, k)| (t, Cost(k))).collect()
    }

    /// Programs of `x` at the given level.
    pub fn generated(&self, level: usize, x: Nt) -> &[ProgramId] {
        &self.generated[level][x.index()]
    }

    /// Pops one tuple and builds every program it stands for.
    pub fn output(&mut self) -> Result<Option<BeeStep>, EnumError> {
        if let (Some(h), Some(k)) = (self.horizon, self.queue.peek_key()) {
            if k > h.0 {
                self.queue = BinaryQueue::new();
                self.members.clear();
            }
        }
        let Some((t, key)) = self.queue.pop() else {
            return Ok(None);
        };
        self.members.remove(&t);
        let rule = self.g.rule(t.rule).clone();
        let c = Cost(rule.cost.0 + t.indices.iter().map(|&n| self.index2cost[n as usize].0).sum::<u64>());
        if c.0 != key {
            return Err(EnumError::Invariant(format!("tuple key {key} differs from its cost {c}")));
        }
        let last = *self.index2cost.last().expect("non-empty");
        if c != last {
            if c < last {
                return Err(EnumError::Invariant(format!("popped cost {c} below last level {last}")));
            }
            self.index2cost.push(c);
            self.generated.push(vec![Vec::new(); self.g.num_nonterminals()]);
        }
        let level = self.index2cost.len() - 1;

        let mut programs = Vec::new();
        if rule.rhs.is_empty() {
            programs.push(self.store.add(rule.id, &[], c));
        } else {
            let BeeSearch { store, generated, .. } = self;
            let lists: Vec<&[ProgramId]> = rule
                .rhs
                .iter()
                .zip(&t.indices)
                .map(|(x, &n)| generated[n as usize][x.index()].as_slice())
                .collect();
            cross_product(&lists, |kids| programs.push(store.add(rule.id, kids, c)));
        }
        self.generated[level][rule.lhs.index()].extend_from_slice(&programs);
        self.stats.built += programs.len() as u64;
        if programs.is_empty() {
            self.stats.empty_calls += 1;
        }

        for i in 0..rule.rhs.len() {
            let next = t.bumped(i);
            if self.members.contains(&next) {
                continue;
            }
            let ni = next.indices[i] as usize;
            // The popped cost is the last level and every argument level is
            // strictly cheaper, so level n_i + 1 always exists.
            let Some(&up) = self.index2cost.get(ni) else {
                return Err(EnumError::Invariant(format!(
                    "level {ni} requested with only {} levels known",
                    self.index2cost.len()
                )));
            };
            let k = c.0 + up.0 - self.index2cost[ni - 1].0;
            self.members.insert(next.clone());
            self.queue.push(next, k)?;
        }
        debug_assert_eq!(self.members.len(), self.queue.len());
        Ok(Some(BeeStep {
            tuple: t,
            cost: c,
            programs,
        }))
    }
}

/// Calls `f` on every combination, first list varying slowest.
pub(crate) fn cross_product(lists: &[&[ProgramId]], mut f: impl FnMut(&[ProgramId])) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut kids: Vec<ProgramId> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&kids);
        let mut i = lists.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                kids[i] = lists[i][idx[i]];
                break;
            }
            idx[i] = 0;
            kids[i] = lists[i][0];
        }
    }
}

impl Enumerator for BeeSearch {
    fn grammar(&self) -> &Grammar {
        &self.g
    }

    fn store(&self) -> &ProgramStore {
        &self.store
    }

    fn next_batch(&mut self, out: &mut Vec<ProgramId>) -> Result<Option<Cost>, EnumError> {
        self.stats.calls += 1;
        let Some(step) = self.output()? else {
            return Ok(None);
        };
        if self.g.rule(step.tuple.rule).lhs == self.g.start() {
            self.stats.emitted += step.programs.len() as u64;
            out.extend_from_slice(&step.programs);
        }
        Ok(Some(step.cost))
    }

    fn stats(&self) -> EnumStats {
        EnumStats {
            stored: self.store.len() as u64,
            queue: *self.queue.stats(),
            ..self.stats
        }
    }
}
