//! Pure-enumeration benchmarks: throughput curves, time to a target count
//! and per-block delay profiles, with CSV output.
//!
//! Wall-clock numbers depend on the machine. The delay profile also
//! records queue operation counts, which do not, and those are what the
//! constant-delay checks look at.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::enumerate::{make_enumerator, Algorithm, BucketSize, EnumError, Enumerator};
use crate::grammar::{make_family, CostAssignment, Family};
use crate::grammar::{Grammar, GrammarError};

/// Programs per delay block.
pub const BLOCK_SIZE: u64 = 100_000;
/// Throughput sampling interval.
pub const DEFAULT_TICK: Duration = Duration::from_secs(1);
/// Header of every CSV this module writes.
pub const CSV_HEADER: &str = "family,k,seed,algorithm,bucket_size,cost_mode,metric,block_or_tick,value";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Enum(#[from] EnumError),
}

/// Where benchmark grammars come from.
#[derive(Debug, Clone)]
pub enum BenchGrammar {
    /// One grammar per `k`; each seed draws its own rule costs.
    Family { family: Family, ks: Vec<usize> },
    /// A fixed grammar; seeds only label repeated runs.
    Named { name: String, grammar: Grammar },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub grammar: BenchGrammar,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// Throughput run length.
    pub duration: Duration,
    /// Scaling target in programs.
    pub target: u64,
    /// Scaling runs that miss the target by then are recorded as DNF.
    pub timeout: Duration,
    pub bucket_size: BucketSize,
    pub tick: Duration,
    /// Runs executed at once; 1 keeps timings clean.
    pub jobs: usize,
}

impl BenchConfig {
    pub fn new(grammar: BenchGrammar, algorithms: Vec<Algorithm>, seeds: Vec<u64>) -> Self {
        BenchConfig {
            grammar,
            algorithms,
            seeds,
            duration: Duration::from_secs(60),
            target: 1_000_000,
            timeout: Duration::from_secs(600),
            bucket_size: BucketSize::default(),
            tick: DEFAULT_TICK,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.seeds.is_empty() {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("at least one algorithm is required".into()));
        }
        if self.tick.is_zero() {
            return Err(BenchError::Config("tick must be positive".into()));
        }
        if let BenchGrammar::Family { family, ks } = &self.grammar {
            if ks.is_empty() {
                return Err(BenchError::Config("empty k range".into()));
            }
            if let Some(&k) = ks.iter().find(|&&k| k < family.min_k()) {
                return Err(BenchError::Config(format!(
                    "{family}_{k} is undefined (k must be at least {})",
                    family.min_k()
                )));
            }
        }
        Ok(())
    }

    /// Every (grammar, seed) instance, in a fixed order.
    pub fn instances(&self) -> Result<Vec<Instance>, BenchError> {
        let mut out = Vec::new();
        match &self.grammar {
            BenchGrammar::Family { family, ks } => {
                for &k in ks {
                    for &seed in &self.seeds {
                        out.push(Instance {
                            family: family.to_string(),
                            k: Some(k),
                            seed,
                            grammar: make_family(*family, k, &CostAssignment::seeded(seed))?,
                        });
                    }
                }
            }
            BenchGrammar::Named { name, grammar } => {
                for &seed in &self.seeds {
                    out.push(Instance {
                        family: name.clone(),
                        k: None,
                        seed,
                        grammar: grammar.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// One concrete grammar a benchmark runs on.
#[derive(Debug, Clone)]
pub struct Instance {
    pub family: String,
    pub k: Option<usize>,
    pub seed: u64,
    pub grammar: Grammar,
}

impl Instance {
    pub fn id(&self) -> String {
        match self.k {
            Some(k) => format!("{}_{k}", self.family),
            None => self.family.clone(),
        }
    }

    fn cost_mode(&self) -> String {
        let m = self.grammar.mode();
        format!("{}:{}", m.name(), m.log_unit())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub index: usize,
    pub seconds: f64,
    /// Queue pushes, pops, peeks, sift steps and bucket scans.
    pub queue_ops: u64,
    /// Recursive output calls that changed a queue (Eco only).
    pub mutating_calls: u64,
}

/// Result of one (instance, algorithm) run.
#[derive(Debug, Clone)]
pub struct BenchSample {
    pub algorithm: Algorithm,
    pub family: String,
    pub k: Option<usize>,
    pub seed: u64,
    /// `None` when the enumerator has no bucket queues.
    pub bucket_count: Option<usize>,
    pub cost_mode: String,
    pub elapsed: f64,
    pub programs_emitted: u64,
    /// Cumulative (seconds, programs) at each tick.
    pub ticks: Vec<(f64, u64)>,
    pub blocks: Vec<BlockReport>,
    pub queue_ops: u64,
    pub empty_calls: u64,
    /// Set when the language ran out before the run ended.
    pub exhausted: bool,
}

impl BenchSample {
    fn start(inst: &Instance, algorithm: Algorithm, e: &dyn Enumerator) -> Self {
        BenchSample {
            algorithm,
            family: inst.family.clone(),
            k: inst.k,
            seed: inst.seed,
            bucket_count: e.bucket_count(),
            cost_mode: inst.cost_mode(),
            elapsed: 0.0,
            programs_emitted: 0,
            ticks: Vec::new(),
            blocks: Vec::new(),
            queue_ops: 0,
            empty_calls: 0,
            exhausted: false,
        }
    }

    fn finish(&mut self, e: &dyn Enumerator, elapsed: f64) {
        let st = e.stats();
        self.elapsed = elapsed;
        self.programs_emitted = st.emitted;
        self.queue_ops = st.queue.work();
        self.empty_calls = st.empty_calls;
    }
}

/// Time to reach the scaling target; `seconds` is `None` for DNF.
#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub sample: BenchSample,
    pub target: u64,
    pub seconds: Option<f64>,
}

/// Per-block delay profile.
#[derive(Debug, Clone)]
pub struct DelayReport {
    pub sample: BenchSample,
    pub block_size: u64,
}

impl DelayReport {
    /// Last block's queue operations over the first block's.
    pub fn ops_ratio(&self) -> Option<f64> {
        let (first, last) = (self.sample.blocks.first()?, self.sample.blocks.last()?);
        (first.queue_ops > 0).then(|| last.queue_ops as f64 / first.queue_ops as f64)
    }

    pub fn time_ratio(&self) -> Option<f64> {
        let (first, last) = (self.sample.blocks.first()?, self.sample.blocks.last()?);
        (first.seconds > 0.0).then(|| last.seconds / first.seconds)
    }
}

/// Runs `f` over every (instance, algorithm) pair with up to `jobs` at once,
/// returning results in input order.
fn run_all<R: Send>(
    cfg: &BenchConfig,
    f: impl Fn(&Instance, Algorithm) -> Result<R, BenchError> + Sync,
) -> Result<Vec<R>, BenchError> {
    cfg.validate()?;
    let instances = cfg.instances()?;
    let work: Vec<(&Instance, Algorithm)> = instances
        .iter()
        .flat_map(|i| cfg.algorithms.iter().map(move |&a| (i, a)))
        .collect();
    if cfg.jobs <= 1 {
        return work.into_iter().map(|(i, a)| f(i, a)).collect();
    }
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<Result<R, BenchError>>>> = Mutex::new((0..work.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..cfg.jobs.min(work.len()) {
            s.spawn(|| loop {
                let idx = {
                    let mut n = next.lock().unwrap();
                    let idx = *n;
                    *n += 1;
                    idx
                };
                let Some(&(i, a)) = work.get(idx) else {
                    break;
                };
                let r = f(i, a);
                results.lock().unwrap()[idx] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Enumerates for `cfg.duration` per run, sampling the cumulative count
/// at every tick. No program is evaluated.
pub fn run_throughput(cfg: &BenchConfig) -> Result<Vec<BenchSample>, BenchError> {
    run_all(cfg, |inst, algo| throughput_one(inst, algo, cfg))
}

fn throughput_one(inst: &Instance, algo: Algorithm, cfg: &BenchConfig) -> Result<BenchSample, BenchError> {
    let mut e = make_enumerator(algo, &inst.grammar, cfg.bucket_size)?;
    let mut sample = BenchSample::start(inst, algo, e.as_ref());
    let mut batch = Vec::new();
    let mut count = 0u64;
    sample.ticks.push((0.0, 0));
    let t0 = Instant::now();
    let mut next_tick = cfg.tick;
    'run: while !cfg.duration.is_zero() {
        // Reading the clock on every batch is cheap next to a batch.
        let now = t0.elapsed();
        while now >= next_tick {
            sample.ticks.push((next_tick.as_secs_f64(), count));
            if next_tick >= cfg.duration {
                break 'run;
            }
            next_tick = (next_tick + cfg.tick).min(cfg.duration);
        }
        batch.clear();
        if e.next_batch(&mut batch)?.is_none() {
            sample.exhausted = true;
            sample.ticks.push((now.as_secs_f64(), count));
            break;
        }
        count += batch.len() as u64;
    }
    sample.finish(e.as_ref(), t0.elapsed().as_secs_f64().min(cfg.duration.as_secs_f64()));
    Ok(sample)
}

/// Measures the time each run needs to emit `cfg.target` programs.
pub fn run_scaling(cfg: &BenchConfig) -> Result<Vec<ScalingResult>, BenchError> {
    if cfg.target == 0 {
        return Err(BenchError::Config("target must be at least 1".into()));
    }
    run_all(cfg, |inst, algo| scaling_one(inst, algo, cfg))
}

fn scaling_one(inst: &Instance, algo: Algorithm, cfg: &BenchConfig) -> Result<ScalingResult, BenchError> {
    let t0 = Instant::now();
    let mut e = make_enumerator(algo, &inst.grammar, cfg.bucket_size)?;
    let mut sample = BenchSample::start(inst, algo, e.as_ref());
    let mut batch = Vec::new();
    let mut count = 0u64;
    let mut seconds = None;
    let mut calls = 0u64;
    loop {
        batch.clear();
        if e.next_batch(&mut batch)?.is_none() {
            sample.exhausted = true;
            break;
        }
        count += batch.len() as u64;
        if count >= cfg.target {
            seconds = Some(t0.elapsed().as_secs_f64());
            break;
        }
        calls += 1;
        if calls % 256 == 0 && t0.elapsed() >= cfg.timeout {
            break;
        }
    }
    sample.finish(e.as_ref(), t0.elapsed().as_secs_f64());
    Ok(ScalingResult {
        sample,
        target: cfg.target,
        seconds,
    })
}

/// Emits `n` programs and reports time and operation counts per block of
/// `block_size` programs. A block closes at the first batch that reaches
/// its boundary, so it may carry a few programs of the next one.
pub fn measure_delay(
    g: &Grammar,
    algo: Algorithm,
    bucket_size: BucketSize,
    n: u64,
    block_size: u64,
) -> Result<DelayReport, BenchError> {
    let inst = Instance {
        family: "grammar".into(),
        k: None,
        seed: 0,
        grammar: g.clone(),
    };
    measure_delay_on(&inst, algo, bucket_size, n, block_size)
}

/// [`measure_delay`] on a labelled instance, so the CSV rows carry its
/// family and seed.
pub fn measure_delay_on(
    inst: &Instance,
    algo: Algorithm,
    bucket_size: BucketSize,
    n: u64,
    block_size: u64,
) -> Result<DelayReport, BenchError> {
    if block_size == 0 || n < 2 * block_size {
        return Err(BenchError::Config(format!(
            "delay profiles need at least two blocks of {block_size} programs, got {n}"
        )));
    }
    let blocks = (n / block_size) as usize;
    let mut e = make_enumerator(algo, &inst.grammar, bucket_size)?;
    let mut sample = BenchSample::start(inst, algo, e.as_ref());
    let mut batch = Vec::new();
    let mut count = 0u64;
    let t0 = Instant::now();
    let (mut last_t, mut last_ops, mut last_calls) = (0.0, e.stats().queue.work(), e.stats().mutating_calls);
    while sample.blocks.len() < blocks {
        batch.clear();
        if e.next_batch(&mut batch)?.is_none() {
            sample.exhausted = true;
            break;
        }
        count += batch.len() as u64;
        if count >= (sample.blocks.len() as u64 + 1) * block_size {
            let st = e.stats();
            let t = t0.elapsed().as_secs_f64();
            let (ops, calls) = (st.queue.work(), st.mutating_calls);
            sample.blocks.push(BlockReport {
                index: sample.blocks.len(),
                seconds: t - last_t,
                queue_ops: ops - last_ops,
                mutating_calls: calls - last_calls,
            });
            (last_t, last_ops, last_calls) = (t, ops, calls);
        }
    }
    sample.finish(e.as_ref(), t0.elapsed().as_secs_f64());
    Ok(DelayReport { sample, block_size })
}

/// Delay profiles for every (instance, algorithm) pair of `cfg`.
pub fn run_delay(cfg: &BenchConfig, n: u64, block_size: u64) -> Result<Vec<DelayReport>, BenchError> {
    run_all(cfg, |inst, algo| measure_delay_on(inst, algo, cfg.bucket_size, n, block_size))
}

fn row(out: &mut String, s: &BenchSample, metric: &str, at: impl std::fmt::Display, value: impl std::fmt::Display) {
    let k = s.k.map(|k| k.to_string()).unwrap_or_default();
    let b = s.bucket_count.map(|b| b.to_string()).unwrap_or_else(|| "none".into());
    let _ = writeln!(
        out,
        "{},{k},{},{},{b},{},{metric},{at},{value}",
        s.family, s.seed, s.algorithm, s.cost_mode
    );
}

pub fn throughput_csv(samples: &[BenchSample]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for s in samples {
        for (i, &(_, count)) in s.ticks.iter().enumerate() {
            row(&mut out, s, "programs", i, count);
        }
        row(&mut out, s, "queue_ops", s.ticks.len().saturating_sub(1), s.queue_ops);
        row(&mut out, s, "empty_calls", s.ticks.len().saturating_sub(1), s.empty_calls);
    }
    out
}

pub fn scaling_csv(results: &[ScalingResult]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in results {
        match r.seconds {
            Some(t) => row(&mut out, &r.sample, "seconds_to_target", r.target, format!("{t:.6}")),
            None => row(&mut out, &r.sample, "seconds_to_target", r.target, "DNF"),
        }
        row(&mut out, &r.sample, "programs", r.target, r.sample.programs_emitted);
        row(&mut out, &r.sample, "empty_calls", r.target, r.sample.empty_calls);
    }
    out
}

pub fn delay_csv(reports: &[DelayReport]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in reports {
        let s = &r.sample;
        for b in &s.blocks {
            row(&mut out, s, "block_seconds", b.index, format!("{:.6}", b.seconds));
            row(&mut out, s, "block_queue_ops", b.index, b.queue_ops);
            row(&mut out, s, "block_mutating_calls", b.index, b.mutating_calls);
        }
        if let Some(x) = r.ops_ratio() {
            row(&mut out, s, "ops_ratio_last_first", s.blocks.len(), format!("{x:.4}"));
        }
        if let Some(x) = r.time_ratio() {
            row(&mut out, s, "time_ratio_last_first", s.blocks.len(), format!("{x:.4}"));
        }
    }
    out
}

/// Turns benchmark CSV into gnuplot data: one indexed dataset per
/// (grammar, algorithm, metric), each line `x mean min max runs`. DNF
/// values are skipped.
pub fn plot_data(csv: &str) -> Result<String, BenchError> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(BenchError::Config("input is not benchmark CSV (header mismatch)".into())),
    }
    type Key = (String, String, String, String);
    let mut groups: BTreeMap<Key, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(BenchError::Config(format!("line {}: expected 9 fields", n + 2)));
        }
        let Ok(value) = f[8].parse::<f64>() else {
            continue;
        };
        let x: u64 = f[7]
            .parse()
            .map_err(|_| BenchError::Config(format!("line {}: bad block_or_tick `{}`", n + 2, f[7])))?;
        let key = (f[0].to_string(), f[1].to_string(), f[3].to_string(), f[6].to_string());
        groups.entry(key).or_default().entry(x).or_default().push(value);
    }
    let mut out = String::new();
    for ((family, k, algo, metric), points) in groups {
        let id = if k.is_empty() { family } else { format!("{family}_{k}") };
        let _ = writeln!(out, "# {id} {algo} {metric}\n# x mean min max runs");
        for (x, vs) in points {
            let mean = vs.iter().sum::<f64>() / vs.len() as f64;
            let min = vs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(out, "{x} {mean} {min} {max} {}", vs.len());
        }
        out.push_str("\n\n");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostMode;
    use crate::grammar::running_example;

    fn cfg(ks: Vec<usize>, seeds: Vec<u64>) -> BenchConfig {
        BenchConfig::new(BenchGrammar::Family { family: Family::D, ks }, Algorithm::ALL.to_vec(), seeds)
    }

    #[test]
    fn zero_duration_gives_zero_counts() {
        let mut c = cfg(vec![4], vec![1, 2]);
        c.duration = Duration::ZERO;
        let samples = run_throughput(&c).unwrap();
        assert_eq!(samples.len(), 8);
        for s in &samples {
            assert_eq!(s.programs_emitted, 0);
            assert!(s.ticks.iter().all(|&(_, n)| n == 0));
        }
    }

    #[test]
    fn throughput_ticks_are_monotone() {
        let mut c = cfg(vec![2], vec![3]);
        c.duration = Duration::from_millis(60);
        c.tick = Duration::from_millis(20);
        for s in run_throughput(&c).unwrap() {
            assert!(s.ticks.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1), "{:?}", s.ticks);
            assert_eq!(s.ticks.last().unwrap().0, 0.06);
            assert!(s.programs_emitted >= s.ticks.last().unwrap().1);
        }
    }

    #[test]
    fn empty_seed_list_is_rejected() {
        assert!(matches!(run_throughput(&cfg(vec![2], vec![])), Err(BenchError::Config(_))));
        assert!(matches!(run_throughput(&cfg(vec![], vec![1])), Err(BenchError::Config(_))));
    }

    #[test]
    fn target_one_is_quick() {
        let mut c = cfg(vec![4, 8], vec![0]);
        c.target = 1;
        let rs = run_scaling(&c).unwrap();
        assert_eq!(rs.len(), 8);
        for r in rs {
            assert!(r.seconds.unwrap() < 1.0);
        }
    }

    #[test]
    fn finite_language_is_dnf() {
        let g = crate::grammar::parse_grammar("start S\nrule S -> a cost 1\nrule S -> b cost 2\n", CostMode::integer()).unwrap();
        let mut c = BenchConfig::new(
            BenchGrammar::Named {
                name: "ab".into(),
                grammar: g,
            },
            Algorithm::ALL.to_vec(),
            vec![0],
        );
        c.target = 3;
        for r in run_scaling(&c).unwrap() {
            assert_eq!(r.seconds, None);
            assert!(r.sample.exhausted);
            assert!(scaling_csv(std::slice::from_ref(&r)).contains(",DNF\n"));
        }
    }

    #[test]
    fn two_blocks_exactly() {
        let g = running_example(CostMode::integer());
        for algo in Algorithm::ALL {
            let r = measure_delay(&g, algo, BucketSize::default(), 2_000, 1_000).unwrap();
            assert_eq!(r.sample.blocks.len(), 2, "{algo}");
            assert!(r.ops_ratio().is_some());
        }
        assert!(measure_delay(&g, Algorithm::Eco, BucketSize::default(), 1_999, 1_000).is_err());
    }

    #[test]
    fn parallel_runs_match_sequential_counts() {
        let mut c = cfg(vec![3], vec![0, 1]);
        c.target = 5_000;
        let seq = run_scaling(&c).unwrap();
        c.jobs = 4;
        let par = run_scaling(&c).unwrap();
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.sample.algorithm, b.sample.algorithm);
            assert_eq!(a.sample.seed, b.sample.seed);
            assert_eq!(a.sample.queue_ops, b.sample.queue_ops);
        }
    }

    #[test]
    fn csv_rows_are_complete_and_plot_data_aggregates() {
        let mut c = cfg(vec![2], vec![0, 1]);
        c.target = 100;
        let csv = scaling_csv(&run_scaling(&c).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for l in lines {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 9, "{l}");
            assert_eq!(f[0], "D");
            assert_eq!(f[1], "2");
            assert!(f[3].parse::<Algorithm>().is_ok());
            assert!(f[5].starts_with("int:"));
        }
        let plot = plot_data(&csv).unwrap();
        assert!(plot.contains("# D_2 eco seconds_to_target"));
        assert!(plot.lines().any(|l| l.starts_with("100 ") && l.ends_with(" 2")));
        assert!(plot_data("nope\n").is_err());
    }
}
