//! Best-first bottom-up enumerators behind one interface.
//!
//! Every enumerator owns a [`ProgramStore`] and hands out [`ProgramId`]s of
//! programs derivable from the grammar's start non-terminal, in
//! non-decreasing cost order, each exactly once.

mod bee;
mod eco;
mod heap;

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;
use thiserror::Error;

pub use bee::{BeeSearch, BeeStep};
pub use eco::{BucketSize, EcoConfig, EcoSearch, DEFAULT_BUCKET_SIZE};
pub use heap::HeapSearch;

use crate::costs::Cost;
use crate::grammar::{Grammar, GrammarError, RuleId};
use crate::queues::{QueueError, QueueStats};
use crate::terms::{ProgramId, ProgramStore, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// A rule and one level index per argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostTuple {
    pub rule: RuleId,
    pub indices: SmallVec<[u32; 4]>,
}

impl CostTuple {
    pub fn zeros(rule: RuleId, arity: usize) -> Self {
        CostTuple {
            rule,
            indices: SmallVec::from_elem(0, arity),
        }
    }

    /// Copy with index `i` incremented.
    pub fn bumped(&self, i: usize) -> Self {
        let mut t = self.clone();
        t.indices[i] += 1;
        t
    }
}

/// Counters shared by all enumerators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// Start programs handed out.
    pub emitted: u64,
    /// Programs built at any non-terminal.
    pub built: u64,
    /// Calls to `next_batch`.
    pub calls: u64,
    /// Calls that produced no program at all.
    pub empty_calls: u64,
    /// Calls of the recursive output function that changed a queue.
    pub mutating_calls: u64,
    /// Programs held in the store.
    pub stored: u64,
    /// Summed over every queue of the enumerator.
    pub queue: QueueStats,
}

pub trait Enumerator {
    fn grammar(&self) -> &Grammar;

    fn store(&self) -> &ProgramStore;

    /// Appends the next start programs, all of one cost, to `out` and
    /// returns that cost, or `None` once the language is exhausted. A call
    /// may append nothing.
    fn next_batch(&mut self, out: &mut Vec<ProgramId>) -> Result<Option<Cost>, EnumError>;

    fn stats(&self) -> EnumStats;

    /// Buckets per queue when bucket queues are in use.
    fn bucket_count(&self) -> Option<usize> {
        None
    }
}

/// The enumeration algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Heap,
    Bee,
    Eco,
    EcoNoBucket,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Heap, Algorithm::Bee, Algorithm::Eco, Algorithm::EcoNoBucket];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Heap => "heap",
            Algorithm::Bee => "bee",
            Algorithm::Eco => "eco",
            Algorithm::EcoNoBucket => "eco-nobucket",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heap" => Ok(Algorithm::Heap),
            "bee" => Ok(Algorithm::Bee),
            "eco" => Ok(Algorithm::Eco),
            "eco-nobucket" | "eco-no-bucket" => Ok(Algorithm::EcoNoBucket),
            other => Err(format!(
                "unknown algorithm `{other}` (expected heap, bee, eco or eco-nobucket)"
            )),
        }
    }
}

/// Builds an enumerator. `bucket_size` only affects [`Algorithm::Eco`].
pub fn make_enumerator(
    algo: Algorithm,
    g: &Grammar,
    bucket_size: BucketSize,
) -> Result<Box<dyn Enumerator + Send>, EnumError> {
    Ok(match algo {
        Algorithm::Heap => Box::new(HeapSearch::new(g)?),
        Algorithm::Bee => Box::new(BeeSearch::new(g)?),
        Algorithm::Eco => Box::new(EcoSearch::new(
            g,
            EcoConfig {
                bucketing: true,
                bucket_size,
            },
        )?),
        Algorithm::EcoNoBucket => Box::new(EcoSearch::new(
            g,
            EcoConfig {
                bucketing: false,
                bucket_size,
            },
        )?),
    })
}

/// Start programs grouped by cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub cost: Cost,
    pub programs: Vec<Term>,
}

/// Runs `e` until at least `n` start programs are out and the level of the
/// `n`-th one is complete, or the language ends.
pub fn collect_levels(e: &mut dyn Enumerator, n: usize) -> Result<Vec<Level>, EnumError> {
    let mut levels: Vec<Level> = Vec::new();
    let mut count = 0;
    let mut batch = Vec::new();
    loop {
        batch.clear();
        let Some(c) = e.next_batch(&mut batch)? else {
            break;
        };
        if batch.is_empty() {
            continue;
        }
        if count >= n && levels.last().is_some_and(|l| l.cost != c) {
            break;
        }
        count += batch.len();
        let terms = batch.iter().map(|&p| e.store().to_term(p));
        match levels.last_mut() {
            Some(l) if l.cost == c => l.programs.extend(terms),
            _ => levels.push(Level {
                cost: c,
                programs: terms.collect(),
            }),
        }
    }
    Ok(levels)
}

/// The first `n` start programs with their costs.
pub fn take_programs(e: &mut dyn Enumerator, n: usize) -> Result<Vec<(Term, Cost)>, EnumError> {
    let mut out = Vec::with_capacity(n);
    let mut batch = Vec::new();
    while out.len() < n {
        batch.clear();
        let Some(c) = e.next_batch(&mut batch)? else {
            break;
        };
        for &p in batch.iter().take(n - out.len()) {
            out.push((e.store().to_term(p), c));
        }
    }
    Ok(out)
}
