//! Command-line interface.
//!
//! Every command writes its resolved configuration to stderr as `# key:
//! value` lines before doing any work, so stdout stays machine-readable.
//! Exit codes: 0 success, 1 usage or input error, 2 task left unsolved,
//! 3 internal invariant violation.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::{Read as _, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, BenchConfig, BenchError, BenchGrammar};
use crate::costs::{CostMode, DEFAULT_DELTA, DEFAULT_RHO};
use crate::enumerate::{collect_levels, make_enumerator, take_programs, Algorithm, BucketSize, EnumError};
use crate::grammar::{
    load_grammar, make_family, parse_grammar, random_grammar, save_grammar, CostAssignment, Family, Grammar,
    GrammarError, RandomGrammarParams,
};
use crate::pbe::{self, Budget, PbeError, SolveOptions};
use crate::queues::QueueError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSOLVED: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ecoenum", version, about = "Best-first bottom-up program enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the cheapest programs of a grammar.
    Enumerate(EnumerateArgs),
    /// Solve programming-by-example tasks.
    Solve(SolveArgs),
    /// Programs enumerated as a function of time.
    BenchThroughput(ThroughputArgs),
    /// Time to enumerate a target number of programs.
    BenchScaling(ScalingArgs),
    /// Time and queue operations per block of programs.
    BenchDelay(DelayArgs),
    /// Write a benchmark or random grammar in grammar file syntax.
    GenGrammar(GenArgs),
    /// Check a grammar file.
    Validate(ValidateArgs),
    /// Turn benchmark CSV into gnuplot data blocks.
    PlotData(PlotArgs),
}

#[derive(Debug, Args, Clone)]
struct CostArgs {
    /// How cost literals in grammar files are read.
    #[arg(long, value_name = "int|real", default_value = "int")]
    cost_mode: String,
    /// Probability discretisation step in integer mode.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Rounding step of real costs.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
}

impl CostArgs {
    fn mode(&self) -> Result<CostMode, CliError> {
        let m = match self.cost_mode.as_str() {
            "int" | "integer" => CostMode::Integer { delta: self.delta },
            "real" => CostMode::Real { rho: self.rho },
            other => return Err(CliError::Usage(format!("unknown cost mode `{other}` (expected int or real)"))),
        };
        m.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(m)
    }
}

#[derive(Debug, Args, Clone)]
struct GrammarArgs {
    /// Grammar file.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["family", "random"])]
    grammar: Option<PathBuf>,
    /// Benchmark family.
    #[arg(long, value_name = "D|N|R", requires = "k")]
    family: Option<String>,
    /// Family parameter: `4`, `4..16`, `4..16:4` or `4,8,12`.
    #[arg(long, value_name = "K")]
    k: Option<String>,
    /// Random test grammar drawn from --seed.
    #[arg(long)]
    random: bool,
    /// Give every family rule this cost instead of seeded random costs.
    #[arg(long, value_name = "COST")]
    uniform_cost: Option<u64>,
    #[command(flatten)]
    cost: CostArgs,
}

#[derive(Debug, Args, Clone)]
struct BucketArgs {
    /// Buckets per queue; sized from the gap estimate when omitted.
    #[arg(long, value_name = "INT")]
    bucket_size: Option<usize>,
    /// Run Eco with binary heaps instead of bucket queues.
    #[arg(long)]
    no_bucketing: bool,
}

impl BucketArgs {
    fn size(&self) -> Result<BucketSize, CliError> {
        match self.bucket_size {
            Some(0) => Err(CliError::Usage("--bucket-size must be at least 1".into())),
            Some(b) => Ok(BucketSize::Fixed(b)),
            None => Ok(BucketSize::default()),
        }
    }

    fn apply(&self, a: Algorithm) -> Algorithm {
        if self.no_bucketing && a == Algorithm::Eco {
            Algorithm::EcoNoBucket
        } else {
            a
        }
    }
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    grammar: GrammarArgs,
    #[arg(long, default_value = "eco")]
    algo: String,
    /// Number of programs to print.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Sort programs of equal cost by their text.
    #[arg(long)]
    canonical: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    buckets: BucketArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Task file; the bundled suite when omitted.
    #[arg(long, value_name = "PATH")]
    task: Option<PathBuf>,
    /// Only solve the task with this name.
    #[arg(long, value_name = "NAME")]
    only: Option<String>,
    #[arg(long, default_value = "eco")]
    algo: String,
    /// Seconds per task.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
    /// Programs per task.
    #[arg(long, default_value_t = 1_000_000)]
    count: u64,
    /// Primitive applications per evaluation.
    #[arg(long, default_value_t = pbe::DEFAULT_FUEL)]
    fuel: u64,
    /// Disable observational-equivalence pruning.
    #[arg(long)]
    no_prune: bool,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    buckets: BucketArgs,
}

#[derive(Debug, Args, Clone)]
struct BenchArgs {
    #[command(flatten)]
    grammar: GrammarArgs,
    /// Comma-separated algorithms.
    #[arg(long, default_value = "heap,bee,eco,eco-nobucket")]
    algos: String,
    /// Number of seeds, counted up from --seed.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Runs at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    buckets: BucketArgs,
}

#[derive(Debug, Args)]
struct ThroughputArgs {
    #[command(flatten)]
    bench: BenchArgs,
    /// Seconds per run.
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[command(flatten)]
    bench: BenchArgs,
    #[arg(long, default_value_t = 1_000_000)]
    target: u64,
    /// Seconds before a run is recorded as DNF.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
}

#[derive(Debug, Args)]
struct DelayArgs {
    #[command(flatten)]
    bench: BenchArgs,
    /// Programs per run.
    #[arg(long, default_value_t = 1_000_000)]
    count: u64,
    /// Programs per block.
    #[arg(long, default_value_t = bench::BLOCK_SIZE)]
    block: u64,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    grammar: GrammarArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_name = "PATH")]
    grammar: PathBuf,
    #[command(flatten)]
    cost: CostArgs,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Benchmark CSV; `-` reads stdin.
    #[arg(long, value_name = "PATH", default_value = "-")]
    csv: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Invariant(String),
}

impl From<GrammarError> for CliError {
    fn from(e: GrammarError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EnumError> for CliError {
    fn from(e: EnumError) -> Self {
        match e {
            EnumError::Grammar(g) => CliError::Usage(g.to_string()),
            EnumError::Queue(q) => CliError::Invariant(q.to_string()),
            EnumError::Invariant(m) => CliError::Invariant(m),
        }
    }
}

impl From<QueueError> for CliError {
    fn from(e: QueueError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Enum(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<PbeError> for CliError {
    fn from(e: PbeError) -> Self {
        match e {
            PbeError::Enum(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "error: {}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let r = match cli.command {
        Command::Enumerate(a) => enumerate(a, out, err),
        Command::Solve(a) => solve(a, out, err),
        Command::BenchThroughput(a) => bench_throughput(a, out, err),
        Command::BenchScaling(a) => bench_scaling(a, out, err),
        Command::BenchDelay(a) => bench_delay(a, out, err),
        Command::GenGrammar(a) => gen_grammar(a, out, err),
        Command::Validate(a) => validate(a, out, err),
        Command::PlotData(a) => plot_data(a, out),
    };
    let _ = out.flush();
    match r {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Invariant(m)) => {
            let _ = writeln!(err, "invariant: {m}");
            EXIT_INVARIANT
        }
    }
}

fn config(err: &mut dyn Write, key: &str, value: impl Display) {
    let _ = writeln!(err, "# {key}: {value}");
}

fn parse_algo(s: &str) -> Result<Algorithm, CliError> {
    s.trim().parse().map_err(CliError::Usage)
}

fn parse_algos(s: &str, buckets: &BucketArgs) -> Result<Vec<Algorithm>, CliError> {
    let mut v: Vec<Algorithm> = Vec::new();
    for a in s.split(',').filter(|p| !p.trim().is_empty()) {
        let a = buckets.apply(parse_algo(a)?);
        if !v.contains(&a) {
            v.push(a);
        }
    }
    if v.is_empty() {
        return Err(CliError::Usage("no algorithm given".into()));
    }
    Ok(v)
}

/// `4`, `4..16` (inclusive), `4..16:4` (with step) or `4,8,12`.
fn parse_k_range(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid --k `{s}` (expected INT, INT..INT[:STEP] or a comma list)"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    s.split(',').map(num).collect()
}

fn costs_for(g: &GrammarArgs, seed: u64) -> CostAssignment {
    match g.uniform_cost {
        Some(c) => CostAssignment::Uniform(c),
        None => CostAssignment::seeded(seed),
    }
}

fn family_of(g: &GrammarArgs) -> Result<Option<(Family, Vec<usize>)>, CliError> {
    let Some(f) = &g.family else {
        return Ok(None);
    };
    let family: Family = f.parse().map_err(CliError::Usage)?;
    let ks = parse_k_range(g.k.as_deref().unwrap_or_default())?;
    if g.cost.cost_mode != "int" && g.cost.cost_mode != "integer" {
        return Err(CliError::Usage("benchmark families have integer costs; --cost-mode applies to --grammar files".into()));
    }
    Ok(Some((family, ks)))
}

fn read_file(p: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
}

/// Resolves one grammar and a label for it.
fn single_grammar(g: &GrammarArgs, seed: u64, err: &mut dyn Write) -> Result<(String, Grammar), CliError> {
    if let Some(path) = &g.grammar {
        let mode = g.cost.mode()?;
        config(err, "grammar", path.display());
        config(err, "cost_mode", format_mode(mode));
        let text = read_file(path)?;
        let gr = load_grammar(&text, mode).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return Ok((path.display().to_string(), gr));
    }
    if let Some((family, ks)) = family_of(g)? {
        let [k] = ks[..] else {
            return Err(CliError::Usage("this command takes a single --k".into()));
        };
        let costs = costs_for(g, seed);
        config(err, "grammar", format!("{family}_{k}"));
        config(err, "costs", describe_costs(&costs));
        config(err, "cost_mode", format_mode(CostMode::integer()));
        return Ok((format!("{family}_{k}"), make_family(family, k, &costs)?));
    }
    if g.random {
        config(err, "grammar", format!("random seed {seed}"));
        config(err, "cost_mode", format_mode(CostMode::integer()));
        return Ok((format!("random-{seed}"), random_grammar(seed, &RandomGrammarParams::default())));
    }
    Err(CliError::Usage("give --grammar PATH, --family F --k K or --random".into()))
}

fn describe_costs(c: &CostAssignment) -> String {
    match *c {
        CostAssignment::Uniform(u) => format!("uniform {u}"),
        CostAssignment::SeededRandom { lo, hi, seed } => format!("seeded random {lo}..={hi}, seed {seed}"),
    }
}

fn format_mode(m: CostMode) -> String {
    match m {
        CostMode::Integer { delta } => format!("int (delta {delta})"),
        CostMode::Real { rho } => format!("real (rho {rho})"),
    }
}

fn format_buckets(b: BucketSize) -> String {
    match b {
        BucketSize::Fixed(n) => n.to_string(),
        BucketSize::Auto { fallback } => format!("auto (fallback {fallback})"),
    }
}

fn enumerate(a: EnumerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let algo = a.buckets.apply(parse_algo(&a.algo)?);
    let bucket_size = a.buckets.size()?;
    let (_, g) = single_grammar(&a.grammar, a.seed, err)?;
    config(err, "command", "enumerate");
    config(err, "algorithm", algo);
    config(err, "bucket_size", format_buckets(bucket_size));
    config(err, "count", a.count);
    config(err, "canonical", a.canonical);
    config(err, "seed", a.seed);
    let mut e = make_enumerator(algo, &g, bucket_size)?;
    let mode = g.mode();
    if a.canonical {
        let levels = collect_levels(e.as_mut(), a.count)?;
        let mut n = 0;
        for level in levels {
            let mut texts: Vec<String> = level.programs.iter().map(|t| t.render(&g)).collect();
            texts.sort();
            for t in texts {
                if n == a.count {
                    break;
                }
                writeln!(out, "{}\t{t}", mode.format(level.cost))?;
                n += 1;
            }
        }
    } else {
        for (t, c) in take_programs(e.as_mut(), a.count)? {
            writeln!(out, "{}\t{}", mode.format(c), t.render(&g))?;
        }
    }
    Ok(EXIT_OK)
}

fn solve(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let algo = a.buckets.apply(parse_algo(&a.algo)?);
    let mode = a.cost.mode()?;
    if !(a.timeout >= 0.0) {
        return Err(CliError::Usage("--timeout must be non-negative".into()));
    }
    let (source, text) = match &a.task {
        Some(p) => (p.display().to_string(), read_file(p)?),
        None => ("bundled".to_string(), pbe::BUNDLED_TASKS.to_string()),
    };
    let mut tasks = pbe::parse_tasks(&text)?;
    if let Some(name) = &a.only {
        tasks.retain(|t| &t.name == name);
        if tasks.is_empty() {
            return Err(CliError::Usage(format!("no task named `{name}` in {source}")));
        }
    }
    let budget = Budget {
        max_programs: a.count,
        max_seconds: a.timeout,
    };
    let opts = SolveOptions {
        mode,
        bucket_size: a.buckets.size()?,
        fuel: a.fuel,
        prune: !a.no_prune,
    };
    config(err, "command", "solve");
    config(err, "tasks", format!("{source} ({} tasks)", tasks.len()));
    config(err, "algorithm", algo);
    config(err, "cost_mode", format_mode(mode));
    config(err, "bucket_size", format_buckets(opts.bucket_size));
    config(err, "timeout", a.timeout);
    config(err, "max_programs", a.count);
    config(err, "fuel", a.fuel);
    config(err, "pruning", opts.prune);
    writeln!(out, "task\tstatus\tcost\tprogram\tenumerated\tpruned\tseconds")?;
    let mut unsolved = 0;
    for t in &tasks {
        let r = pbe::solve(t, algo, budget, opts)?;
        let secs = r.stats.elapsed.as_secs_f64();
        match &r.solution {
            Some(s) => writeln!(
                out,
                "{}\tsolved\t{}\t{}\t{}\t{}\t{secs:.4}",
                t.name,
                mode.format(s.cost),
                s.rendered,
                r.stats.enumerated,
                r.stats.pruned
            )?,
            None => {
                unsolved += 1;
                writeln!(out, "{}\tunsolved\t-\t-\t{}\t{}\t{secs:.4}", t.name, r.stats.enumerated, r.stats.pruned)?
            }
        }
    }
    if unsolved > 0 {
        let _ = writeln!(err, "error: {unsolved} of {} tasks unsolved within budget", tasks.len());
        return Ok(EXIT_UNSOLVED);
    }
    Ok(EXIT_OK)
}

fn bench_config(b: &BenchArgs, err: &mut dyn Write) -> Result<BenchConfig, CliError> {
    let algorithms = parse_algos(&b.algos, &b.buckets)?;
    if b.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    if b.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let seeds: Vec<u64> = (b.seed..b.seed + b.seeds).collect();
    let grammar = match family_of(&b.grammar)? {
        Some((family, ks)) => {
            if b.grammar.uniform_cost.is_some() {
                return Err(CliError::Usage("benchmarks draw family costs from the seeds; drop --uniform-cost".into()));
            }
            config(err, "grammar", format!("{family}_k, k in {ks:?}"));
            config(err, "costs", "seeded random 1..=100, one draw per seed");
            config(err, "cost_mode", format_mode(CostMode::integer()));
            BenchGrammar::Family { family, ks }
        }
        None => {
            let (name, grammar) = single_grammar(&b.grammar, b.seed, err)?;
            BenchGrammar::Named { name, grammar }
        }
    };
    let mut cfg = BenchConfig::new(grammar, algorithms, seeds);
    cfg.bucket_size = b.buckets.size()?;
    cfg.jobs = b.jobs;
    let names: Vec<&str> = cfg.algorithms.iter().map(|a| a.name()).collect();
    config(err, "algorithms", names.join(","));
    config(err, "seeds", format!("{:?}", cfg.seeds));
    config(err, "bucket_size", format_buckets(cfg.bucket_size));
    config(err, "jobs", cfg.jobs);
    Ok(cfg)
}

fn seconds(name: &str, s: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("--{name} must be a non-negative number of seconds")))
}

fn emit_csv(b: &BenchArgs, csv: &str, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match &b.csv {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            config(err, "csv", p.display());
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn bench_throughput(a: ThroughputArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mut cfg = bench_config(&a.bench, err)?;
    cfg.duration = seconds("duration", a.duration)?;
    config(err, "command", "bench-throughput");
    config(err, "duration", a.duration);
    config(err, "tick", cfg.tick.as_secs_f64());
    let samples = bench::run_throughput(&cfg)?;
    emit_csv(&a.bench, &bench::throughput_csv(&samples), out, err)
}

fn bench_scaling(a: ScalingArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mut cfg = bench_config(&a.bench, err)?;
    cfg.target = a.target;
    cfg.timeout = seconds("timeout", a.timeout)?;
    config(err, "command", "bench-scaling");
    config(err, "target", a.target);
    config(err, "timeout", a.timeout);
    let results = bench::run_scaling(&cfg)?;
    emit_csv(&a.bench, &bench::scaling_csv(&results), out, err)
}

fn bench_delay(a: DelayArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let cfg = bench_config(&a.bench, err)?;
    config(err, "command", "bench-delay");
    config(err, "count", a.count);
    config(err, "block", a.block);
    let reports = bench::run_delay(&cfg, a.count, a.block)?;
    for r in &reports {
        let s = &r.sample;
        let id = match s.k {
            Some(k) => format!("{}_{k}", s.family),
            None => s.family.clone(),
        };
        let ratio = r.ops_ratio().map_or("-".into(), |x| format!("{x:.4}"));
        let _ = writeln!(err, "# {id} seed {} {}: last/first queue ops {ratio}", s.seed, s.algorithm);
    }
    emit_csv(&a.bench, &bench::delay_csv(&reports), out, err)
}

fn gen_grammar(a: GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if a.grammar.grammar.is_some() {
        return Err(CliError::Usage("gen-grammar takes --family/--k or --random, not --grammar".into()));
    }
    let (_, g) = single_grammar(&a.grammar, a.seed, err)?;
    config(err, "command", "gen-grammar");
    config(err, "seed", a.seed);
    out.write_all(save_grammar(&g).as_bytes())?;
    Ok(EXIT_OK)
}

fn validate(a: ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mode = a.cost.mode()?;
    config(err, "command", "validate");
    config(err, "grammar", a.grammar.display());
    config(err, "cost_mode", format_mode(mode));
    let text = read_file(&a.grammar)?;
    let g = parse_grammar(&text, mode).map_err(|e| CliError::Usage(format!("{}: {e}", a.grammar.display())))?;
    let report = g.validate();
    if !report.is_ok() {
        for v in &report.violations {
            let _ = writeln!(err, "error: {}: {v}", a.grammar.display());
        }
        return Ok(EXIT_USAGE);
    }
    let min = g.compute_min_programs()?;
    writeln!(
        out,
        "ok: {} non-terminals, {} rules, start {}",
        g.num_nonterminals(),
        g.rules().len(),
        g.nt_name(g.start())
    )?;
    let infinite = g.infinite_nonterminals();
    for x in g.nonterminals() {
        writeln!(
            out,
            "{}\tmin cost {}\t{}\t{}",
            g.nt_name(x),
            mode.format(min.cost(x)),
            if infinite[x.index()] { "infinite" } else { "finite" },
            min.program(x).render(&g)
        )?;
    }
    Ok(EXIT_OK)
}

fn plot_data(a: PlotArgs, out: &mut dyn Write) -> CliResult {
    let csv = if a.csv.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        read_file(&a.csv)?
    };
    out.write_all(bench::plot_data(&csv)?.as_bytes())?;
    Ok(EXIT_OK)
}
