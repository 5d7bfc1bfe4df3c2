//! Programming by example on top of the enumerators.
//!
//! A task names a DSL and lists input/output examples. The solver streams
//! start programs best-first, evaluates each on every example input, skips
//! programs whose outputs on the inputs (their signature) were already seen,
//! and stops at the first program reproducing every output.

mod dsl;
mod value;

use std::collections::HashSet;
use std::rc::Rc;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use dsl::{apply, Dsl, Lambda, Op, Pred, TaskGrammar, Zip};
pub use value::{parse_value, EvalError, Value, ValueType, DEFAULT_LIST_CAP, DEFAULT_STR_CAP};

use crate::costs::{Cost, CostMode};
use crate::enumerate::{make_enumerator, Algorithm, BucketSize, EnumError};
use crate::terms::{ProgramId, ProgramStore, Term};

/// Primitive applications allowed per evaluation.
pub const DEFAULT_FUEL: u64 = 10_000;

/// Tasks shipped with the crate, in task file syntax.
pub const BUNDLED_TASKS: &str = include_str!("../../tasks/bundled.tasks");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PbeError {
    #[error("unknown grammar `{0}` (expected fig1, list or string)")]
    UnknownGrammar(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("task file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("task `{task}`: {message}")]
    Task { task: String, message: String },
    #[error(transparent)]
    Enum(#[from] EnumError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub inputs: Vec<Value>,
    pub output: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub grammar_name: String,
    pub examples: Vec<Example>,
}

/// Outputs on every example input, errors included.
pub type Signature = Vec<Value>;

impl Task {
    pub fn dsl(&self) -> Result<Dsl, PbeError> {
        Dsl::by_name(&self.grammar_name).ok_or_else(|| PbeError::UnknownGrammar(self.grammar_name.clone()))
    }

    fn err(&self, message: impl Into<String>) -> PbeError {
        PbeError::Task {
            task: self.name.clone(),
            message: message.into(),
        }
    }

    /// Input types, output type; consistent across examples.
    pub fn types(&self) -> Result<(Vec<ValueType>, ValueType), PbeError> {
        let first = self.examples.first().ok_or_else(|| self.err("no examples"))?;
        let tys = |ex: &Example| -> Option<(Vec<ValueType>, ValueType)> {
            let ins = ex.inputs.iter().map(Value::ty).collect::<Option<Vec<_>>>()?;
            Some((ins, ex.output.ty()?))
        };
        let want = tys(first).ok_or_else(|| self.err("error values in examples"))?;
        for ex in &self.examples[1..] {
            if tys(ex).as_ref() != Some(&want) {
                return Err(self.err("examples disagree on input or output types"));
            }
        }
        Ok(want)
    }

    pub fn grammar(&self, mode: CostMode) -> Result<TaskGrammar, PbeError> {
        let (ins, out) = self.types()?;
        self.dsl()?.grammar_for(&ins, out, mode).map_err(|m| self.err(m))
    }

    pub fn outputs(&self) -> Vec<Value> {
        self.examples.iter().map(|e| e.output.clone()).collect()
    }
}

/// Parses a task file:
///
/// ```text
/// task add-one
/// grammar fig1
/// example in: 1 out: "Hello2"
/// ```
pub fn parse_tasks(text: &str) -> Result<Vec<Task>, PbeError> {
    let mut tasks: Vec<Task> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| PbeError::Parse { line, message };
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let (word, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let rest = rest.trim();
        match word {
            "task" => {
                if rest.is_empty() {
                    return Err(err("task needs a name".into()));
                }
                tasks.push(Task {
                    name: rest.to_string(),
                    grammar_name: String::new(),
                    examples: Vec::new(),
                });
            }
            "grammar" | "example" => {
                let Some(task) = tasks.last_mut() else {
                    return Err(err(format!("`{word}` before any `task`")));
                };
                if word == "grammar" {
                    task.grammar_name = rest.to_string();
                    continue;
                }
                let body = rest.strip_prefix("in:").ok_or_else(|| err("expected `in:`".into()))?;
                let mut inputs = Vec::new();
                let mut body = body.trim_start();
                while !body.starts_with("out:") {
                    let (v, r) = parse_value(body).map_err(err)?;
                    inputs.push(v);
                    body = r.trim_start();
                    if let Some(r) = body.strip_prefix(',') {
                        body = r.trim_start();
                    } else if !body.starts_with("out:") {
                        return Err(err("expected `,` or `out:`".into()));
                    }
                }
                let (output, r) = parse_value(&body[4..]).map_err(err)?;
                if !r.trim().is_empty() {
                    return Err(err(format!("trailing text `{}`", r.trim())));
                }
                if let Some(prev) = task.examples.first() {
                    if prev.inputs.len() != inputs.len() {
                        return Err(err("examples of a task must have the same number of inputs".into()));
                    }
                }
                task.examples.push(Example { inputs, output });
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    for t in &tasks {
        if t.grammar_name.is_empty() {
            return Err(t.err("missing `grammar` line"));
        }
        if t.examples.is_empty() {
            return Err(t.err("no examples"));
        }
    }
    Ok(tasks)
}

/// Evaluates a term bottom-up. Each primitive application uses one unit
/// of fuel, so a term larger than `fuel` yields `Error(fuel)`.
pub fn evaluate(t: &Term, tg: &TaskGrammar, inputs: &[Value], fuel: u64) -> Value {
    fn go(t: &Term, tg: &TaskGrammar, inputs: &[Value]) -> Value {
        let args: Vec<Value> = t.children.iter().map(|c| go(c, tg, inputs)).collect();
        let refs: Vec<&Value> = args.iter().collect();
        apply(&tg.ops[t.rule.index()], &refs, inputs)
    }
    if t.size() as u64 > fuel {
        return Value::Error(EvalError::Fuel);
    }
    go(t, tg, inputs)
}

/// Outputs of `t` on every example input of `task`.
pub fn obs_signature(t: &Term, tg: &TaskGrammar, task: &Task, fuel: u64) -> Signature {
    task.examples.iter().map(|e| evaluate(t, tg, &e.inputs, fuel)).collect()
}

/// Signatures of stored programs, memoised per program id so shared
/// subprograms are evaluated once.
pub struct Evaluator<'a> {
    tg: &'a TaskGrammar,
    task: &'a Task,
    fuel: u64,
    /// Indexed by program id: size and signature.
    memo: Vec<Option<(u64, Rc<Signature>)>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(tg: &'a TaskGrammar, task: &'a Task, fuel: u64) -> Self {
        Evaluator {
            tg,
            task,
            fuel,
            memo: Vec::new(),
        }
    }

    pub fn signature(&mut self, store: &ProgramStore, p: ProgramId) -> Rc<Signature> {
        self.eval(store, p).1
    }

    fn eval(&mut self, store: &ProgramStore, p: ProgramId) -> (u64, Rc<Signature>) {
        if let Some(Some(hit)) = self.memo.get(p.index()) {
            return hit.clone();
        }
        let kids: Vec<(u64, Rc<Signature>)> = store.children(p).iter().map(|&c| self.eval(store, c)).collect();
        let size = 1 + kids.iter().map(|(s, _)| s).sum::<u64>();
        let sig: Signature = if size > self.fuel {
            vec![Value::Error(EvalError::Fuel); self.task.examples.len()]
        } else {
            let op = &self.tg.ops[store.rule(p).index()];
            self.task
                .examples
                .iter()
                .enumerate()
                .map(|(e, ex)| {
                    let args: Vec<&Value> = kids.iter().map(|(_, s)| &s[e]).collect();
                    apply(op, &args, &ex.inputs)
                })
                .collect()
        };
        let entry = (size, Rc::new(sig));
        if self.memo.len() <= p.index() {
            self.memo.resize(p.index() + 1, None);
        }
        self.memo[p.index()] = Some(entry.clone());
        entry
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_programs: u64,
    pub max_seconds: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_programs: 1_000_000,
            max_seconds: 300.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub mode: CostMode,
    pub bucket_size: BucketSize,
    pub fuel: u64,
    /// Observational-equivalence pruning on the start stream.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: CostMode::integer(),
            bucket_size: BucketSize::default(),
            fuel: DEFAULT_FUEL,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    /// Start programs taken from the enumerator.
    pub enumerated: u64,
    /// Of those, skipped as observationally equivalent to an earlier one.
    pub pruned: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub program: Term,
    pub cost: Cost,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: Option<Solution>,
    pub stats: SolveStats,
}

/// Searches for the cheapest program matching every example.
pub fn solve(task: &Task, algo: Algorithm, budget: Budget, opts: SolveOptions) -> Result<SolveOutcome, PbeError> {
    let started = Instant::now();
    let tg = task.grammar(opts.mode)?;
    let mut stats = SolveStats::default();
    let done = |stats: SolveStats, solution| SolveOutcome {
        solution,
        stats: SolveStats {
            elapsed: started.elapsed(),
            ..stats
        },
    };
    if budget.max_programs == 0 {
        return Ok(done(stats, None));
    }
    let want = task.outputs();
    let mut e = make_enumerator(algo, &tg.grammar, opts.bucket_size)?;
    let mut ev = Evaluator::new(&tg, task, opts.fuel);
    let mut seen: HashSet<Rc<Signature>> = HashSet::new();
    let mut batch = Vec::new();
    loop {
        batch.clear();
        let Some(cost) = e.next_batch(&mut batch)? else {
            return Ok(done(stats, None));
        };
        for &p in &batch {
            stats.enumerated += 1;
            let sig = ev.signature(e.store(), p);
            if *sig == want {
                let program = e.store().to_term(p);
                let rendered = program.render(&tg.grammar);
                return Ok(done(
                    stats,
                    Some(Solution {
                        program,
                        cost,
                        rendered,
                    }),
                ));
            }
            if opts.prune && !seen.insert(sig) {
                stats.pruned += 1;
            }
            if stats.enumerated >= budget.max_programs {
                return Ok(done(stats, None));
            }
        }
        if started.elapsed().as_secs_f64() >= budget.max_seconds {
            return Ok(done(stats, None));
        }
    }
}

/// Parses an algorithm name for the solver.
pub fn parse_algorithm(name: &str) -> Result<Algorithm, PbeError> {
    name.parse().map_err(|_| PbeError::UnknownAlgorithm(name.to_string()))
}
