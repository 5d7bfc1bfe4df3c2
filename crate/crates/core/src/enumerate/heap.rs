//! Heap Search: one heap of concrete programs per non-terminal and a
//! successor map per non-terminal.
//!
//! `succ_X(p)` is the program generated from `X` right after `p`; programs
//! of equal cost come out one after the other in heap order. The store
//! interns programs, so it doubles as the set of seen programs: a program's
//! root rule fixes its non-terminal, hence seen-at-`X` and seen coincide.
//!
//! A program is expanded (its one-step neighbours inserted) when its own
//! successor is first asked for, not when it is popped. Expanding on pop
//! can ask for the successor of a program whose expansion is still running,
//! and then pops from an incomplete heap. Deferred, each expansion only
//! recurses into strictly cheaper programs, and every generated program up
//! to `p` has been expanded by the time `succ_X(p)` is popped.

use smallvec::SmallVec;

use super::{EnumError, EnumStats, Enumerator};
use crate::costs::Cost;
use crate::grammar::{Grammar, Nt};
use crate::queues::{BinaryQueue, KeyedQueue, QueueStats};
use crate::terms::{ProgramId, ProgramStore, Term};

const NONE: u32 = u32::MAX;

pub struct HeapSearch {
    g: Grammar,
    store: ProgramStore,
    heaps: Vec<BinaryQueue<ProgramId>>,
    /// `succ[p]`, indexed by program id; `NONE` when not computed.
    succ: Vec<u32>,
    /// Successor of the bottom program at each non-terminal.
    succ_bottom: Vec<u32>,
    /// Last program handed out from the start non-terminal.
    last: Option<ProgramId>,
    stats: EnumStats,
}

impl HeapSearch {
    pub fn new(g: &Grammar) -> Result<Self, EnumError> {
        g.ensure_valid()?;
        let min = g.compute_min_programs()?;
        let n = g.num_nonterminals();
        let mut s = HeapSearch {
            g: g.clone(),
            store: ProgramStore::interning(),
            heaps: (0..n).map(|_| BinaryQueue::new()).collect(),
            succ: Vec::new(),
            succ_bottom: vec![NONE; n],
            last: None,
            stats: EnumStats::default(),
        };
        let min_ids: Vec<ProgramId> = min.programs.iter().map(|t| s.store.insert_term(t, g)).collect();
        // MinP(X) itself goes first so that, among equal costs, it is the
        // program popped as the successor of bottom.
        for x in g.nonterminals() {
            let own = s.store.rule(min_ids[x.index()]);
            let rules = std::iter::once(own).chain(g.rules_for(x).iter().copied().filter(|&r| r != own));
            for r in rules {
                let rule = g.rule(r);
                let kids: SmallVec<[ProgramId; 4]> = rule.rhs.iter().map(|a| min_ids[a.index()]).collect();
                let cost = kids.iter().fold(rule.cost, |c, &k| c + s.store.cost(k));
                let (p, _) = s.store.intern(r, &kids, cost);
                s.insert(p, x)?;
            }
        }
        for x in g.nonterminals() {
            let p = s
                .compute_successor(None, x)?
                .ok_or_else(|| EnumError::Invariant(format!("empty heap for `{}` at init", g.nt_name(x))))?;
            if p != min_ids[x.index()] {
                return Err(EnumError::Invariant(format!(
                    "first program of `{}` is not its minimal program",
                    g.nt_name(x)
                )));
            }
        }
        Ok(s)
    }

    fn insert(&mut self, p: ProgramId, x: Nt) -> Result<(), EnumError> {
        self.heaps[x.index()].push(p, self.store.cost(p).0)?;
        Ok(())
    }

    fn succ_slot(&mut self, p: Option<ProgramId>, x: Nt) -> &mut u32 {
        match p {
            None => &mut self.succ_bottom[x.index()],
            Some(p) => {
                if self.succ.len() <= p.index() {
                    self.succ.resize(self.store.len().max(p.index() + 1), NONE);
                }
                &mut self.succ[p.index()]
            }
        }
    }

    /// The program generated from `x` right after `p` (`None` = bottom), or
    /// `None` when `x` has no further program.
    pub fn compute_successor(&mut self, p: Option<ProgramId>, x: Nt) -> Result<Option<ProgramId>, EnumError> {
        let slot = *self.succ_slot(p, x);
        if slot != NONE {
            return Ok(Some(ProgramId(slot)));
        }
        self.stats.mutating_calls += 1;
        if let Some(p) = p {
            self.expand(p, x)?;
        }
        let Some((next, _)) = self.heaps[x.index()].pop() else {
            return Ok(None);
        };
        *self.succ_slot(p, x) = next.0;
        Ok(Some(next))
    }

    /// Inserts `f(.., succ(p_i), ..)` for every argument of `p`.
    fn expand(&mut self, p: ProgramId, x: Nt) -> Result<(), EnumError> {
        let rule = self.store.rule(p);
        let rhs = self.g.rule(rule).rhs.clone();
        let kids: SmallVec<[ProgramId; 4]> = SmallVec::from_slice(self.store.children(p));
        for (i, &xi) in rhs.iter().enumerate() {
            let Some(next) = self.compute_successor(Some(kids[i]), xi)? else {
                continue;
            };
            let mut args = kids.clone();
            args[i] = next;
            let cost = Cost(self.store.cost(p).0 - self.store.cost(kids[i]).0 + self.store.cost(next).0);
            let (q, fresh) = self.store.intern(rule, &args, cost);
            if fresh {
                self.insert(q, x)?;
            }
        }
        Ok(())
    }

    /// Next start program with its cost.
    pub fn next_program(&mut self) -> Result<Option<(ProgramId, Cost)>, EnumError> {
        self.stats.calls += 1;
        let s = self.g.start();
        let Some(p) = self.compute_successor(self.last, s)? else {
            self.stats.empty_calls += 1;
            return Ok(None);
        };
        self.last = Some(p);
        self.stats.emitted += 1;
        self.stats.built += 1;
        Ok(Some((p, self.store.cost(p))))
    }

    /// Heap contents of `x` in pop order.
    pub fn heap_snapshot(&self, x: Nt) -> Vec<(Term, Cost)> {
        let mut h = self.heaps[x.index()].clone();
        std::iter::from_fn(|| h.pop())
            .map(|(p, k)| (self.store.to_term(p), Cost(k)))
            .collect()
    }

    /// Every program seen so far.
    pub fn seen(&self) -> Vec<Term> {
        (0..self.store.len() as u32).map(|i| self.store.to_term(ProgramId(i))).collect()
    }

    pub fn successor_of_bottom(&self, x: Nt) -> Option<Term> {
        let s = self.succ_bottom[x.index()];
        (s != NONE).then(|| self.store.to_term(ProgramId(s)))
    }

    /// Memoised successor of a generated program.
    pub fn successor(&self, p: &Term) -> Option<Term> {
        let id = self.find(p)?;
        let s = *self.succ.get(id.index())?;
        (s != NONE).then(|| self.store.to_term(ProgramId(s)))
    }

    /// Id of a seen program.
    pub fn find(&self, t: &Term) -> Option<ProgramId> {
        let kids: Option<SmallVec<[ProgramId; 4]>> = t.children.iter().map(|c| self.find(c)).collect();
        self.store.lookup(t.rule, &kids?)
    }
}

impl Enumerator for HeapSearch {
    fn grammar(&self) -> &Grammar {
        &self.g
    }

    fn store(&self) -> &ProgramStore {
        &self.store
    }

    fn next_batch(&mut self, out: &mut Vec<ProgramId>) -> Result<Option<Cost>, EnumError> {
        Ok(self.next_program()?.map(|(p, c)| {
            out.push(p);
            c
        }))
    }

    fn stats(&self) -> EnumStats {
        let mut queue = QueueStats::default();
        for h in &self.heaps {
            queue.merge(h.stats());
        }
        EnumStats {
            stored: self.store.len() as u64,
            queue,
            ..self.stats
        }
    }
}
