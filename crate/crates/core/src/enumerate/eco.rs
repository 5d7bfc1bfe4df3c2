//! Eco Search: per-non-terminal cost-tuple queues with frugal expansion.
//!
//! For each non-terminal `X`, `index2cost_X[l]` is the `l`-th smallest cost
//! of an `X`-program and `generated_X[l]` all `X`-programs of that cost.
//! `index2cost_X` may run one level ahead of `generated_X`: a level is
//! announced by peeking `Queue_X` as soon as some tuple needs its cost, and
//! filled only when `output(X, l)` drains it. Memoisation therefore tests
//! `l < generated_X.len()`.
//!
//! A tuple `(r, n)` in `Queue_X` stands for every `f(p_1..p_k)` with `p_i`
//! at level `n_i` of `X_i`; its key is `cost(r) + sum index2cost_{X_i}[n_i]`.
//! Popping it pushes at most one successor per argument position, so each
//! queue holds few tuples and, once the key spread is bounded, a bucket
//! queue gives constant-time operations.

use std::collections::HashSet;
use std::sync::Arc;

use super::bee::cross_product;
use super::{CostTuple, EnumError, EnumStats, Enumerator};
use crate::costs::{estimate_successor_gap, Cost, GapEstimate, DEFAULT_PROBE_BUDGET};
use crate::grammar::{Grammar, Nt};
use crate::queues::{AnyQueue, BinaryQueue, BucketQueue, KeyedQueue, QueueStats};
use crate::terms::{ProgramId, ProgramStore};

/// Default bucket count when the gap estimate is too large to use.
pub const DEFAULT_BUCKET_SIZE: usize = 20;

/// Bucket count of the per-non-terminal bucket queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketSize {
    /// One bucket per key offset up to the estimated spread bound when it is
    /// below 1000, else `fallback`.
    Auto { fallback: usize },
    Fixed(usize),
}

impl Default for BucketSize {
    fn default() -> Self {
        BucketSize::Auto {
            fallback: DEFAULT_BUCKET_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EcoConfig {
    pub bucketing: bool,
    pub bucket_size: BucketSize,
}

impl Default for EcoConfig {
    fn default() -> Self {
        EcoConfig {
            bucketing: true,
            bucket_size: BucketSize::default(),
        }
    }
}

struct NtState {
    index2cost: Vec<Cost>,
    generated: Vec<Vec<ProgramId>>,
    queue: AnyQueue<CostTuple>,
    members: HashSet<CostTuple>,
    /// Key of the last popped tuple, or the smallest initial key.
    floor: u64,
    /// Largest `key - floor` over all pushes, the initial queue included.
    max_spread: u64,
}

/// The start level currently being streamed.
struct Drain {
    cost: Cost,
    programs: Vec<ProgramId>,
}

pub struct EcoSearch {
    g: Arc<Grammar>,
    store: ProgramStore,
    nts: Vec<NtState>,
    current: Option<Drain>,
    bucket_count: Option<usize>,
    gap: Option<GapEstimate>,
    /// Frontier calls per non-terminal during the current start level.
    level_mutations: Vec<u32>,
    max_level_mutations: Vec<u32>,
    stats: EnumStats,
}

impl EcoSearch {
    pub fn new(g: &Grammar, config: EcoConfig) -> Result<Self, EnumError> {
        g.ensure_valid()?;
        let min = g.compute_min_programs()?;
        let n = g.num_nonterminals();
        let (bucket_count, gap) = match (config.bucketing, config.bucket_size) {
            (false, _) => (None, None),
            (true, BucketSize::Fixed(b)) => (Some(b.max(1)), None),
            (true, BucketSize::Auto { fallback }) => {
                let est = estimate_successor_gap(g, DEFAULT_PROBE_BUDGET);
                (Some(est.bucket_size(fallback)), Some(est))
            }
        };
        let mut nts = Vec::with_capacity(n);
        for x in g.nonterminals() {
            let mut init: Vec<(CostTuple, u64)> = g
                .rules_for(x)
                .iter()
                .map(|&r| {
                    let rule = g.rule(r);
                    let key = rule.cost.0 + rule.rhs.iter().map(|a| min.cost(*a).0).sum::<u64>();
                    (CostTuple::zeros(r, rule.rhs.len()), key)
                })
                .collect();
            // the sort is stable, so ties keep rule order in both queue kinds
            init.sort_by_key(|(_, k)| *k);
            let floor = init.first().map_or(0, |(_, k)| *k);
            let mut queue = match bucket_count {
                Some(b) => AnyQueue::Bucket(BucketQueue::with_base(b, floor)),
                None => AnyQueue::Binary(BinaryQueue::new()),
            };
            let max_spread = init.last().map_or(0, |(_, k)| *k) - floor;
            let mut members = HashSet::with_capacity(init.len());
            for (t, k) in init {
                members.insert(t.clone());
                queue.push(t, k)?;
            }
            nts.push(NtState {
                index2cost: Vec::new(),
                generated: Vec::new(),
                queue,
                members,
                floor,
                max_spread,
            });
        }
        Ok(EcoSearch {
            g: Arc::new(g.clone()),
            store: ProgramStore::new(),
            nts,
            current: None,
            bucket_count,
            gap,
            level_mutations: vec![0; n],
            max_level_mutations: vec![0; n],
            stats: EnumStats::default(),
        })
    }

    /// Bucket count in use, `None` without bucketing.
    pub fn bucket_count(&self) -> Option<usize> {
        self.bucket_count
    }

    /// Gap estimate used to size the buckets, when sized automatically.
    pub fn gap_estimate(&self) -> Option<&GapEstimate> {
        self.gap.as_ref()
    }

    pub fn index2cost(&self, x: Nt) -> &[Cost] {
        &self.nts[x.index()].index2cost
    }

    /// Number of levels of `x` generated so far.
    pub fn generated_levels(&self, x: Nt) -> usize {
        self.nts[x.index()].generated.len()
    }

    /// Queue contents of `x` in pop order.
    pub fn queue_snapshot(&self, x: Nt) -> Vec<(CostTuple, Cost)> {
        let mut q = self.nts[x.index()].queue.clone();
        std::iter::from_fn(|| q.pop()).map(|(t, k)| (t, Cost(k))).collect()
    }

    pub fn queue_stats(&self, x: Nt) -> QueueStats {
        *self.nts[x.index()].queue.stats()
    }

    /// Largest key distance to the last popped key ever seen in `Queue_x`.
    pub fn max_spread(&self, x: Nt) -> Cost {
        Cost(self.nts[x.index()].max_spread)
    }

    /// Per non-terminal, the most frontier calls made within one start
    /// level.
    pub fn max_mutations_per_level(&self) -> &[u32] {
        &self.max_level_mutations
    }

    /// All `x`-programs of the `l`-th smallest cost, or `None` when `x` has
    /// fewer levels.
    pub fn output(&mut self, x: Nt, l: usize) -> Result<Option<(Cost, &[ProgramId])>, EnumError> {
        self.finish_current()?;
        while self.nts[x.index()].generated.len() <= l {
            let next = self.nts[x.index()].generated.len();
            if !self.output_rec(x, next)? {
                return Ok(None);
            }
        }
        let st = &self.nts[x.index()];
        Ok(Some((st.index2cost[l], st.generated[l].as_slice())))
    }

    /// The next start level with all its programs.
    pub fn next_level(&mut self) -> Result<Option<(Cost, Vec<ProgramId>)>, EnumError> {
        let mut out = Vec::new();
        let Some(c) = self.next_batch(&mut out)? else {
            return Ok(None);
        };
        while self.current.is_some() {
            self.next_batch(&mut out)?;
        }
        Ok(Some((c, out)))
    }

    fn finish_current(&mut self) -> Result<(), EnumError> {
        let mut sink = Vec::new();
        while self.current.is_some() {
            self.next_batch(&mut sink)?;
        }
        Ok(())
    }

    /// Makes level `l` of `x` available; false when `x` has no such level.
    fn output_rec(&mut self, x: Nt, l: usize) -> Result<bool, EnumError> {
        let have = self.nts[x.index()].generated.len();
        if l < have {
            return Ok(true);
        }
        if l > have {
            return Err(EnumError::Invariant(format!(
                "level {l} of `{}` requested before level {have}",
                self.g.nt_name(x)
            )));
        }
        let Some(c) = self.begin_level(x)? else {
            return Ok(false);
        };
        let mut level = Vec::new();
        while self.drain_one(x, c, &mut level)? {}
        self.nts[x.index()].generated.push(level);
        Ok(true)
    }

    /// Fixes the cost of the next level of `x` from its queue.
    fn begin_level(&mut self, x: Nt) -> Result<Option<Cost>, EnumError> {
        self.stats.mutating_calls += 1;
        self.level_mutations[x.index()] += 1;
        let st = &mut self.nts[x.index()];
        let Some(c) = st.queue.peek_key() else {
            return Ok(None);
        };
        let l = st.generated.len();
        match st.index2cost.get(l) {
            Some(&known) if known.0 != c => {
                return Err(EnumError::Invariant(format!(
                    "announced cost {known} of level {l} of `{}` differs from queue minimum {c}",
                    self.g.nt_name(x)
                )))
            }
            Some(_) => {}
            None => st.index2cost.push(Cost(c)),
        }
        Ok(Some(Cost(c)))
    }

    /// Pops one tuple of cost `c` from `Queue_x`, appends its programs to
    /// `level` and pushes its successors. False when no tuple of cost `c`
    /// remains.
    fn drain_one(&mut self, x: Nt, c: Cost, level: &mut Vec<ProgramId>) -> Result<bool, EnumError> {
        let xi = x.index();
        if self.nts[xi].queue.peek_key() != Some(c.0) {
            return Ok(false);
        }
        let (t, key) = self.nts[xi].queue.pop().expect("peeked");
        self.nts[xi].members.remove(&t);
        self.nts[xi].floor = key;
        let g = Arc::clone(&self.g);
        let rule = g.rule(t.rule);

        let before = level.len();
        if rule.rhs.is_empty() {
            level.push(self.store.add(rule.id, &[], c));
        } else {
            for (a, &n) in rule.rhs.iter().zip(&t.indices) {
                if !self.output_rec(*a, n as usize)? {
                    return Err(EnumError::Invariant(format!(
                        "tuple refers to missing level {n} of `{}`",
                        g.nt_name(*a)
                    )));
                }
            }
            let EcoSearch { nts, store, .. } = self;
            let lists: smallvec::SmallVec<[&[ProgramId]; 4]> = rule
                .rhs
                .iter()
                .zip(&t.indices)
                .map(|(a, &n)| nts[a.index()].generated[n as usize].as_slice())
                .collect();
            cross_product(&lists, |kids| level.push(store.add(rule.id, kids, c)));
        }
        self.stats.built += (level.len() - before) as u64;

        // frugal expansion
        for (i, a) in rule.rhs.iter().enumerate() {
            let next = t.bumped(i);
            if self.nts[xi].members.contains(&next) {
                continue;
            }
            let ai = a.index();
            let ni = next.indices[i] as usize;
            if ni >= self.nts[ai].index2cost.len() {
                // announce the next level of the argument, if it has one
                match self.nts[ai].queue.peek_key() {
                    Some(k) => self.nts[ai].index2cost.push(Cost(k)),
                    None => continue,
                }
            }
            let arg = &self.nts[ai].index2cost;
            let k = key + arg[ni].0 - arg[ni - 1].0;
            let st = &mut self.nts[xi];
            st.max_spread = st.max_spread.max(k - st.floor);
            st.members.insert(next.clone());
            st.queue.push(next, k)?;
        }
        Ok(true)
    }
}

impl Enumerator for EcoSearch {
    fn grammar(&self) -> &Grammar {
        &self.g
    }

    fn store(&self) -> &ProgramStore {
        &self.store
    }

    /// Streams the start non-terminal one tuple at a time.
    fn next_batch(&mut self, out: &mut Vec<ProgramId>) -> Result<Option<Cost>, EnumError> {
        self.stats.calls += 1;
        let s = self.g.start();
        let mut drain = match self.current.take() {
            Some(d) => d,
            None => {
                self.level_mutations.iter_mut().for_each(|m| *m = 0);
                let Some(cost) = self.begin_level(s)? else {
                    return Ok(None);
                };
                Drain {
                    cost,
                    programs: Vec::new(),
                }
            }
        };
        let before = drain.programs.len();
        let progressed = self.drain_one(s, drain.cost, &mut drain.programs)?;
        out.extend_from_slice(&drain.programs[before..]);
        self.stats.emitted += (drain.programs.len() - before) as u64;
        if !progressed {
            self.stats.empty_calls += 1;
        }
        let cost = drain.cost;
        if progressed && self.nts[s.index()].queue.peek_key() == Some(cost.0) {
            self.current = Some(drain);
        } else {
            self.nts[s.index()].generated.push(drain.programs);
            for (m, &cur) in self.max_level_mutations.iter_mut().zip(&self.level_mutations) {
                *m = (*m).max(cur);
            }
        }
        Ok(Some(cost))
    }

    fn bucket_count(&self) -> Option<usize> {
        EcoSearch::bucket_count(self)
    }

    fn stats(&self) -> EnumStats {
        let mut queue = QueueStats::default();
        for st in &self.nts {
            queue.merge(st.queue.stats());
        }
        EnumStats {
            stored: self.store.len() as u64,
            queue,
            ..self.stats
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostMode;
    use crate::grammar::{make_family, running_example, CostAssignment, Family, GrammarBuilder, RuleId};

    fn keys(e: &EcoSearch, x: Nt) -> Vec<(u32, u64)> {
        e.queue_snapshot(x).into_iter().map(|(t, c)| (t.rule.0, c.0)).collect()
    }

    fn render_level(e: &EcoSearch, ids: &[ProgramId]) -> Vec<String> {
        ids.iter().map(|&p| e.store().render(p, e.grammar())).collect()
    }

    #[test]
    fn running_example_init_keys() {
        let g = running_example(CostMode::real());
        for bucketing in [true, false] {
            let e = EcoSearch::new(
                &g,
                EcoConfig {
                    bucketing,
                    ..EcoConfig::default()
                },
            )
            .unwrap();
            let s = g.nt_by_name("str").unwrap();
            let i = g.nt_by_name("int").unwrap();
            assert_eq!(keys(&e, s), [(0, 110), (1, 200), (2, 620), (3, 750)]);
            assert_eq!(keys(&e, i), [(4, 180), (5, 330), (6, 890)]);
        }
    }

    #[test]
    fn running_example_calls() {
        let g = running_example(CostMode::real());
        let mut e = EcoSearch::new(&g, EcoConfig::default()).unwrap();
        let s = g.nt_by_name("str").unwrap();
        let i = g.nt_by_name("int").unwrap();
        let level = |e: &mut EcoSearch, l| {
            let (c, ids) = e.output(s, l).unwrap().unwrap();
            let ids = ids.to_vec();
            (c.0, render_level(e, &ids))
        };
        assert_eq!(level(&mut e, 0), (110, vec!["\"Hello\"".to_string()]));
        assert_eq!(level(&mut e, 1), (200, vec!["\"World\"".to_string()]));
        assert_eq!(level(&mut e, 2), (620, vec!["cast(var)".to_string()]));
        assert_eq!(e.generated_levels(i), 1);
        // (r3, (1)) at 6.2 + 3.3 - 1.8
        assert!(e
            .queue_snapshot(s)
            .contains(&(CostTuple { rule: RuleId(2), indices: [1].into_iter().collect() }, Cost(770))));
        assert_eq!(e.index2cost(i), &[Cost(180), Cost(330)]);
    }

    #[test]
    fn memoised_levels_leave_queues_alone() {
        let g = running_example(CostMode::integer());
        let mut e = EcoSearch::new(&g, EcoConfig::default()).unwrap();
        let s = g.start();
        let first = e.output(s, 3).unwrap().unwrap().1.to_vec();
        let stats = e.queue_stats(s);
        let again = e.output(s, 3).unwrap().unwrap().1.to_vec();
        assert_eq!(first, again);
        assert_eq!(stats, e.queue_stats(s));
    }

    #[test]
    fn running_example_levels() {
        let g = running_example(CostMode::integer());
        let mut e = EcoSearch::new(&g, EcoConfig::default()).unwrap();
        let mut got = Vec::new();
        for _ in 0..6 {
            let (c, ids) = e.next_level().unwrap().unwrap();
            let mut names = render_level(&e, &ids);
            names.sort();
            got.push((c.0, names));
        }
        let want: Vec<(u64, Vec<String>)> = vec![
            (11, vec!["\"Hello\"".into()]),
            (20, vec!["\"World\"".into()]),
            (62, vec!["cast(var)".into()]),
            (75, vec!["concat(\"Hello\", \"Hello\")".into()]),
            (77, vec!["cast(1)".into()]),
            (84, vec!["concat(\"Hello\", \"World\")".into(), "concat(\"World\", \"Hello\")".into()]),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn single_constant() {
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.start("S").rule("S", "a", &[], Cost(5));
        let g = b.build();
        let mut e = EcoSearch::new(&g, EcoConfig::default()).unwrap();
        assert_eq!(keys(&e, g.start()), [(0, 5)]);
        let (c, ids) = e.next_level().unwrap().unwrap();
        assert_eq!((c, ids.len()), (Cost(5), 1));
        assert_eq!(e.next_level().unwrap(), None);
    }

    #[test]
    fn n2_uniform_init_keys() {
        let g = make_family(Family::N, 2, &CostAssignment::Uniform(1)).unwrap();
        let e = EcoSearch::new(&g, EcoConfig::default()).unwrap();
        let name = |r: u32| g.primitive_of(RuleId(r)).name.clone();
        let named = |x: &str| -> Vec<(String, u64)> {
            let mut v: Vec<_> = keys(&e, g.nt_by_name(x).unwrap())
                .into_iter()
                .map(|(r, k)| (name(r), k))
                .collect();
            v.sort();
            v
        };
        // S1 owns f1, f2, g1, h1; S2 owns g2, h2
        assert_eq!(
            named("S1"),
            [("f1".to_string(), 2), ("f2".into(), 2), ("g1".into(), 2), ("h1".into(), 1)]
        );
        assert_eq!(named("S2"), [("g2".to_string(), 2), ("h2".into(), 1)]);
    }
}
