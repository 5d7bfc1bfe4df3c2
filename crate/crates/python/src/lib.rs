//! Python bindings: grammars, the four enumerators, the oracle, the PBE
//! solver and the delay profiler.

use pyo3::exceptions::{PyRuntimeError, PyStopIteration, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ecoenum::bench;
use ecoenum::costs::{estimate_successor_gap, Cost, CostMode, GapMethod, DEFAULT_PROBE_BUDGET};
use ecoenum::enumerate::{self as en, Algorithm, BucketSize, EnumError};
use ecoenum::grammar::{self as gr, CostAssignment, Family, RandomGrammarParams};
use ecoenum::oracle;
use ecoenum::pbe;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn enum_err(e: EnumError) -> PyErr {
    match e {
        EnumError::Grammar(g) => value_err(g),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<CostMode> {
    mode.parse().map_err(value_err)
}

fn parse_algo(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(value_err)
}

fn bucket(size: Option<usize>) -> PyResult<BucketSize> {
    match size {
        Some(0) => Err(value_err("bucket_size must be at least 1")),
        Some(b) => Ok(BucketSize::Fixed(b)),
        None => Ok(BucketSize::default()),
    }
}

/// A weighted deterministic tree grammar.
#[pyclass(name = "Grammar", module = "ecoenum_py", frozen)]
#[derive(Clone)]
struct PyGrammar {
    inner: gr::Grammar,
}

#[pymethods]
impl PyGrammar {
    /// Parses and validates grammar file text.
    #[staticmethod]
    #[pyo3(signature = (text, cost_mode = "int"))]
    fn parse(text: &str, cost_mode: &str) -> PyResult<Self> {
        let inner = gr::load_grammar(text, parse_mode(cost_mode)?).map_err(value_err)?;
        Ok(PyGrammar { inner })
    }

    /// `D_k`, `N_k` or `R_k`, with seeded random costs in 1..=100 or a
    /// uniform cost.
    #[staticmethod]
    #[pyo3(signature = (family, k, seed = 0, uniform_cost = None))]
    fn family(family: &str, k: usize, seed: u64, uniform_cost: Option<u64>) -> PyResult<Self> {
        let f: Family = family.parse().map_err(value_err)?;
        let costs = match uniform_cost {
            Some(c) => CostAssignment::Uniform(c),
            None => CostAssignment::seeded(seed),
        };
        Ok(PyGrammar {
            inner: gr::make_family(f, k, &costs).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn random(seed: u64) -> Self {
        PyGrammar {
            inner: gr::random_grammar(seed, &RandomGrammarParams::default()),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (cost_mode = "real"))]
    fn running_example(cost_mode: &str) -> PyResult<Self> {
        Ok(PyGrammar {
            inner: gr::running_example(parse_mode(cost_mode)?),
        })
    }

    /// Grammar file text.
    fn save(&self) -> String {
        gr::save_grammar(&self.inner)
    }

    #[getter]
    fn start(&self) -> String {
        self.inner.nt_name(self.inner.start()).to_string()
    }

    #[getter]
    fn num_rules(&self) -> usize {
        self.inner.rules().len()
    }

    #[getter]
    fn nonterminals(&self) -> Vec<String> {
        self.inner.nonterminals().map(|x| self.inner.nt_name(x).to_string()).collect()
    }

    /// Minimal cost and program per non-terminal.
    fn min_programs(&self) -> PyResult<Vec<(String, f64, String)>> {
        let g = &self.inner;
        let m = g.compute_min_programs().map_err(value_err)?;
        Ok(g.nonterminals()
            .map(|x| (g.nt_name(x).to_string(), g.mode().to_f64(m.cost(x)), m.program(x).render(g)))
            .collect())
    }

    /// Successor gap estimate as a dict.
    fn gap_estimate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let e = estimate_successor_gap(&self.inner, DEFAULT_PROBE_BUDGET);
        let d = PyDict::new_bound(py);
        d.set_item("m_hat", e.m_hat.0)?;
        d.set_item("spread_bound", e.spread_bound().0)?;
        d.set_item("exact", e.method == GapMethod::ExactOracle)?;
        d.set_item("bucket_size", e.bucket_size(en::DEFAULT_BUCKET_SIZE))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Grammar(start={:?}, nonterminals={}, rules={})",
            self.start(),
            self.inner.num_nonterminals(),
            self.inner.rules().len()
        )
    }
}

/// Streams start programs in non-decreasing cost order as
/// `(cost, program)` pairs.
#[pyclass(name = "Enumerator", module = "ecoenum_py")]
struct PyEnumerator {
    inner: Box<dyn en::Enumerator + Send>,
    pending: std::collections::VecDeque<(Cost, String)>,
    algo: Algorithm,
}

impl PyEnumerator {
    fn fill(&mut self) -> PyResult<bool> {
        let mut batch = Vec::new();
        while self.pending.is_empty() {
            batch.clear();
            let Some(c) = self.inner.next_batch(&mut batch).map_err(enum_err)? else {
                return Ok(false);
            };
            let g = self.inner.grammar();
            for &p in &batch {
                self.pending.push_back((c, self.inner.store().render(p, g)));
            }
        }
        Ok(true)
    }
}

#[pymethods]
impl PyEnumerator {
    #[new]
    #[pyo3(signature = (grammar, algo = "eco", bucket_size = None))]
    fn new(grammar: &PyGrammar, algo: &str, bucket_size: Option<usize>) -> PyResult<Self> {
        let algo = parse_algo(algo)?;
        let inner = en::make_enumerator(algo, &grammar.inner, bucket(bucket_size)?).map_err(enum_err)?;
        Ok(PyEnumerator {
            inner,
            pending: Default::default(),
            algo,
        })
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.algo.name()
    }

    fn __iter__(slf: PyRef<'_, Self>) -> PyRef<'_, Self> {
        slf
    }

    fn __next__(&mut self) -> PyResult<(f64, String)> {
        if !self.fill()? {
            return Err(PyStopIteration::new_err(()));
        }
        let (c, s) = self.pending.pop_front().expect("filled");
        Ok((self.inner.grammar().mode().to_f64(c), s))
    }

    /// Up to `n` more programs.
    fn take(&mut self, n: usize) -> PyResult<Vec<(f64, String)>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n && self.fill()? {
            let (c, s) = self.pending.pop_front().expect("filled");
            out.push((self.inner.grammar().mode().to_f64(c), s));
        }
        Ok(out)
    }

    /// Work counters.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.stats();
        let d = PyDict::new_bound(py);
        d.set_item("emitted", s.emitted)?;
        d.set_item("built", s.built)?;
        d.set_item("calls", s.calls)?;
        d.set_item("empty_calls", s.empty_calls)?;
        d.set_item("mutating_calls", s.mutating_calls)?;
        d.set_item("stored", s.stored)?;
        d.set_item("queue_ops", s.queue.work())?;
        d.set_item("overflow_pushes", s.queue.overflow_pushes)?;
        d.set_item("bucket_count", self.inner.bucket_count())?;
        Ok(d)
    }
}

/// The first `count` programs; with `canonical`, whole cost levels are
/// sorted by text first so every algorithm prints the same list.
#[pyfunction]
#[pyo3(signature = (grammar, algo = "eco", count = 10, canonical = false, bucket_size = None))]
fn enumerate(
    grammar: &PyGrammar,
    algo: &str,
    count: usize,
    canonical: bool,
    bucket_size: Option<usize>,
) -> PyResult<Vec<(f64, String)>> {
    let g = &grammar.inner;
    let mut e = en::make_enumerator(parse_algo(algo)?, g, bucket(bucket_size)?).map_err(enum_err)?;
    let mode = g.mode();
    if !canonical {
        let progs = en::take_programs(e.as_mut(), count).map_err(enum_err)?;
        return Ok(progs.into_iter().map(|(t, c)| (mode.to_f64(c), t.render(g))).collect());
    }
    let mut out = Vec::new();
    for level in en::collect_levels(e.as_mut(), count).map_err(enum_err)? {
        let mut texts: Vec<String> = level.programs.iter().map(|t| t.render(g)).collect();
        texts.sort();
        out.extend(texts.into_iter().map(|t| (mode.to_f64(level.cost), t)));
    }
    out.truncate(count);
    Ok(out)
}

/// Exhaustive reference: the start programs of the cheapest cost levels
/// covering `n` programs, each level sorted by text.
#[pyfunction]
fn oracle_levels(grammar: &PyGrammar, n: usize) -> PyResult<Vec<(f64, Vec<String>)>> {
    let g = &grammar.inner;
    let s = g.start();
    let t = oracle::table_for_prefix(g, s, n, oracle::DEFAULT_MEMORY_CAP).map_err(value_err)?;
    let levels = t.levels_covering(s, n).unwrap_or(t.num_levels(s));
    (0..levels)
        .map(|l| {
            let (c, terms) = t.kth_level(s, l).map_err(value_err)?;
            let mut texts: Vec<String> = terms.iter().map(|p| p.render(g)).collect();
            texts.sort();
            Ok((g.mode().to_f64(c), texts))
        })
        .collect()
}

/// Task file text of the bundled suite.
#[pyfunction]
fn bundled_tasks() -> &'static str {
    pbe::BUNDLED_TASKS
}

/// Solves every task in `tasks` (task file syntax). Returns one dict per
/// task; `program` and `cost` are `None` when unsolved.
#[pyfunction]
#[pyo3(signature = (tasks, algo = "eco", max_programs = 1_000_000, timeout = 300.0, prune = true))]
fn solve<'py>(
    py: Python<'py>,
    tasks: &str,
    algo: &str,
    max_programs: u64,
    timeout: f64,
    prune: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let algo = parse_algo(algo)?;
    let parsed = pbe::parse_tasks(tasks).map_err(value_err)?;
    let budget = pbe::Budget {
        max_programs,
        max_seconds: timeout,
    };
    let opts = pbe::SolveOptions {
        prune,
        ..pbe::SolveOptions::default()
    };
    let mut out = Vec::new();
    for t in &parsed {
        let r = py
            .allow_threads(|| pbe::solve(t, algo, budget, opts))
            .map_err(|e| match e {
                pbe::PbeError::Enum(e) => enum_err(e),
                other => value_err(other),
            })?;
        let d = PyDict::new_bound(py);
        d.set_item("task", &t.name)?;
        d.set_item("program", r.solution.as_ref().map(|s| s.rendered.clone()))?;
        d.set_item("cost", r.solution.as_ref().map(|s| opts.mode.to_f64(s.cost)))?;
        d.set_item("enumerated", r.stats.enumerated)?;
        d.set_item("pruned", r.stats.pruned)?;
        d.set_item("seconds", r.stats.elapsed.as_secs_f64())?;
        out.push(d);
    }
    Ok(out)
}

/// Per-block `(seconds, queue_ops, mutating_calls)` over `n` programs.
#[pyfunction]
#[pyo3(signature = (grammar, algo = "eco", n = 1_000_000, block = bench::BLOCK_SIZE, bucket_size = None))]
fn measure_delay(
    py: Python<'_>,
    grammar: &PyGrammar,
    algo: &str,
    n: u64,
    block: u64,
    bucket_size: Option<usize>,
) -> PyResult<Vec<(f64, u64, u64)>> {
    let algo = parse_algo(algo)?;
    let b = bucket(bucket_size)?;
    let g = grammar.inner.clone();
    let r = py
        .allow_threads(move || bench::measure_delay(&g, algo, b, n, block))
        .map_err(|e| match e {
            bench::BenchError::Enum(e) => enum_err(e),
            other => value_err(other),
        })?;
    Ok(r.sample.blocks.iter().map(|b| (b.seconds, b.queue_ops, b.mutating_calls)).collect())
}

#[pymodule]
fn ecoenum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrammar>()?;
    m.add_class::<PyEnumerator>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_levels, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_tasks, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(measure_delay, m)?)?;
    m.add("ALGORITHMS", Algorithm::ALL.iter().map(|a| a.name()).collect::<Vec<_>>())?;
    Ok(())
}
