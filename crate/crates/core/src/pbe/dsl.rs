//! The bundled DSLs: typed primitives, their costs and total semantics.
//!
//! Every DSL grammar has one non-terminal per value type (`int`, `list`,
//! `str`) plus one variable rule `x<i>` per task input. Types that cannot
//! be built from the task's inputs and constants are dropped, so the
//! grammar stays productive.

use super::value::{EvalError, Value, ValueType, DEFAULT_LIST_CAP, DEFAULT_STR_CAP};
use crate::costs::{Cost, CostMode};
use crate::grammar::{Grammar, GrammarBuilder};

use EvalError as E;
use ValueType as T;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Var(usize),
    Int(i64),
    Str(&'static str),
    // running example
    Cast,
    Add,
    Concat,
    // list DSL
    Head,
    Last,
    Take,
    Drop,
    Access,
    Minimum,
    Maximum,
    Reverse,
    Sort,
    Sum,
    Map(Lambda),
    Filter(Pred),
    Count(Pred),
    ZipWith(Zip),
    // string DSL
    Substr,
    IndexOf,
    ToUpper,
    ToLower,
    IntToStr,
    StrToInt,
    Len,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda {
    Inc,
    Dec,
    Double,
    Half,
    Negate,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pred {
    Pos,
    Neg,
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zip {
    Add,
    Sub,
    Mul,
    Min,
    Max,
}

impl Lambda {
    const ALL: [Lambda; 6] = [
        Lambda::Inc,
        Lambda::Dec,
        Lambda::Double,
        Lambda::Half,
        Lambda::Negate,
        Lambda::Square,
    ];

    fn name(self) -> &'static str {
        match self {
            Lambda::Inc => "inc",
            Lambda::Dec => "dec",
            Lambda::Double => "double",
            Lambda::Half => "half",
            Lambda::Negate => "negate",
            Lambda::Square => "square",
        }
    }

    fn apply(self, x: i64) -> Option<i64> {
        match self {
            Lambda::Inc => x.checked_add(1),
            Lambda::Dec => x.checked_sub(1),
            Lambda::Double => x.checked_mul(2),
            Lambda::Half => Some(x.div_euclid(2)),
            Lambda::Negate => x.checked_neg(),
            Lambda::Square => x.checked_mul(x),
        }
    }
}

impl Pred {
    const ALL: [Pred; 4] = [Pred::Pos, Pred::Neg, Pred::Odd, Pred::Even];

    fn name(self) -> &'static str {
        match self {
            Pred::Pos => "pos",
            Pred::Neg => "neg",
            Pred::Odd => "odd",
            Pred::Even => "even",
        }
    }

    fn test(self, x: i64) -> bool {
        match self {
            Pred::Pos => x > 0,
            Pred::Neg => x < 0,
            Pred::Odd => x % 2 != 0,
            Pred::Even => x % 2 == 0,
        }
    }
}

impl Zip {
    const ALL: [Zip; 5] = [Zip::Add, Zip::Sub, Zip::Mul, Zip::Min, Zip::Max];

    fn name(self) -> &'static str {
        match self {
            Zip::Add => "add",
            Zip::Sub => "sub",
            Zip::Mul => "mul",
            Zip::Min => "min",
            Zip::Max => "max",
        }
    }

    fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            Zip::Add => a.checked_add(b),
            Zip::Sub => a.checked_sub(b),
            Zip::Mul => a.checked_mul(b),
            Zip::Min => Some(a.min(b)),
            Zip::Max => Some(a.max(b)),
        }
    }
}

/// A bundled DSL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dsl {
    /// The two-type running example; its only input is `var`.
    Fig1,
    List,
    String,
}

/// A candidate rule before pruning: result type, primitive name, semantics,
/// argument types and cost in tenths.
struct Candidate {
    lhs: ValueType,
    name: String,
    op: Op,
    args: Vec<ValueType>,
    tenths: u64,
}

fn cand(lhs: ValueType, name: impl Into<String>, op: Op, args: &[ValueType], tenths: u64) -> Candidate {
    Candidate {
        lhs,
        name: name.into(),
        op,
        args: args.to_vec(),
        tenths,
    }
}

/// A DSL grammar specialised to a task, with the semantics of every rule.
#[derive(Debug, Clone)]
pub struct TaskGrammar {
    pub grammar: Grammar,
    /// Indexed by rule id.
    pub ops: Vec<Op>,
}

impl Dsl {
    pub const ALL: [Dsl; 3] = [Dsl::Fig1, Dsl::List, Dsl::String];

    pub fn name(self) -> &'static str {
        match self {
            Dsl::Fig1 => "fig1",
            Dsl::List => "list",
            Dsl::String => "string",
        }
    }

    pub fn by_name(name: &str) -> Option<Dsl> {
        Dsl::ALL.into_iter().find(|d| d.name() == name)
    }

    fn candidates(self, inputs: &[ValueType]) -> Vec<Candidate> {
        let mut v = Vec::new();
        match self {
            Dsl::Fig1 => {
                v.push(cand(T::Str, "\"Hello\"", Op::Str("Hello"), &[], 11));
                v.push(cand(T::Str, "\"World\"", Op::Str("World"), &[], 20));
                v.push(cand(T::Str, "cast", Op::Cast, &[T::Int], 44));
                v.push(cand(T::Str, "concat", Op::Concat, &[T::Str, T::Str], 53));
                v.push(cand(T::Int, "var", Op::Var(0), &[], 18));
                v.push(cand(T::Int, "1", Op::Int(1), &[], 33));
                v.push(cand(T::Int, "add", Op::Add, &[T::Int, T::Int], 53));
                return v;
            }
            Dsl::List => {
                for (n, name) in [(0, "0"), (1, "1"), (2, "2"), (3, "3")] {
                    v.push(cand(T::Int, name, Op::Int(n), &[], 20));
                }
                let unary_int = [
                    ("head", Op::Head),
                    ("last", Op::Last),
                    ("minimum", Op::Minimum),
                    ("maximum", Op::Maximum),
                    ("sum", Op::Sum),
                ];
                for (name, op) in unary_int {
                    v.push(cand(T::Int, name, op, &[T::List], 25));
                }
                v.push(cand(T::Int, "access", Op::Access, &[T::Int, T::List], 30));
                v.push(cand(T::List, "take", Op::Take, &[T::Int, T::List], 30));
                v.push(cand(T::List, "drop", Op::Drop, &[T::Int, T::List], 30));
                v.push(cand(T::List, "reverse", Op::Reverse, &[T::List], 25));
                v.push(cand(T::List, "sort", Op::Sort, &[T::List], 25));
                for l in Lambda::ALL {
                    v.push(cand(T::List, format!("map_{}", l.name()), Op::Map(l), &[T::List], 25));
                }
                for p in Pred::ALL {
                    v.push(cand(T::List, format!("filter_{}", p.name()), Op::Filter(p), &[T::List], 25));
                    v.push(cand(T::Int, format!("count_{}", p.name()), Op::Count(p), &[T::List], 25));
                }
                for z in Zip::ALL {
                    v.push(cand(T::List, format!("zipwith_{}", z.name()), Op::ZipWith(z), &[T::List, T::List], 30));
                }
            }
            Dsl::String => {
                for (n, name) in [(0, "0"), (1, "1")] {
                    v.push(cand(T::Int, name, Op::Int(n), &[], 20));
                }
                for (s, name) in [(" ", "\" \""), (",", "\",\""), (".", "\".\""), ("-", "\"-\""), ("@", "\"@\"")] {
                    v.push(cand(T::Str, name, Op::Str(s), &[], 20));
                }
                v.push(cand(T::Str, "concat", Op::Concat, &[T::Str, T::Str], 30));
                v.push(cand(T::Str, "substr", Op::Substr, &[T::Str, T::Int, T::Int], 30));
                v.push(cand(T::Int, "index_of", Op::IndexOf, &[T::Str, T::Str], 30));
                v.push(cand(T::Str, "to_upper", Op::ToUpper, &[T::Str], 25));
                v.push(cand(T::Str, "to_lower", Op::ToLower, &[T::Str], 25));
                v.push(cand(T::Str, "int_to_str", Op::IntToStr, &[T::Int], 25));
                v.push(cand(T::Int, "str_to_int", Op::StrToInt, &[T::Str], 25));
                v.push(cand(T::Int, "len", Op::Len, &[T::Str], 25));
                v.push(cand(T::Int, "add", Op::Add, &[T::Int, T::Int], 30));
            }
        }
        for (i, &t) in inputs.iter().enumerate() {
            v.push(cand(t, format!("x{i}"), Op::Var(i), &[], 10));
        }
        v
    }

    /// The grammar for a task with the given input types, started at the
    /// output type. Costs are given in tenths: integer mode uses them as
    /// they are, real mode divides by ten.
    pub fn grammar_for(self, inputs: &[ValueType], output: ValueType, mode: CostMode) -> Result<TaskGrammar, String> {
        if self == Dsl::Fig1 && inputs != [T::Int] {
            return Err("the fig1 DSL takes exactly one integer input".into());
        }
        let cands = self.candidates(inputs);
        // keep only types buildable from inputs and constants
        let mut live: Vec<ValueType> = Vec::new();
        loop {
            let before = live.len();
            for c in &cands {
                if !live.contains(&c.lhs) && c.args.iter().all(|a| live.contains(a)) {
                    live.push(c.lhs);
                }
            }
            if live.len() == before {
                break;
            }
        }
        if !live.contains(&output) {
            return Err(format!(
                "the {} DSL cannot build a `{}` from these inputs",
                self.name(),
                output.nt_name()
            ));
        }
        let mut b = GrammarBuilder::new(mode);
        b.start(output.nt_name());
        let mut ops = Vec::new();
        for c in cands {
            if !live.contains(&c.lhs) || !c.args.iter().all(|a| live.contains(a)) {
                continue;
            }
            let cost = match mode {
                CostMode::Integer { .. } => Cost(c.tenths),
                CostMode::Real { .. } => mode
                    .parse_literal(c.tenths as f64 / 10.0)
                    .map_err(|e| e.to_string())?,
            };
            let args: Vec<&str> = c.args.iter().map(|a| a.nt_name()).collect();
            b.rule(c.lhs.nt_name(), &c.name, &args, cost);
            ops.push(c.op);
        }
        let grammar = b.build();
        grammar.ensure_valid().map_err(|e| e.to_string())?;
        Ok(TaskGrammar { grammar, ops })
    }
}

/// Applies one primitive. Never panics; failures are [`Value::Error`].
pub fn apply(op: &Op, args: &[&Value], inputs: &[Value]) -> Value {
    if let Some(e) = args.iter().find_map(|a| match a {
        Value::Error(e) => Some(*e),
        _ => None,
    }) {
        return Value::Error(e);
    }
    apply_ok(op, args, inputs).unwrap_or_else(Value::Error)
}

fn int(v: &Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(n) => Ok(*n),
        _ => Err(E::Type),
    }
}

fn list(v: &Value) -> Result<&[i64], EvalError> {
    match v {
        Value::IntList(xs) => Ok(xs),
        _ => Err(E::Type),
    }
}

fn string(v: &Value) -> Result<&str, EvalError> {
    match v {
        Value::Str(s) => Ok(s),
        _ => Err(E::Type),
    }
}

fn checked_str(s: String) -> Result<Value, EvalError> {
    if s.chars().count() > DEFAULT_STR_CAP {
        Err(E::Cap)
    } else {
        Ok(Value::Str(s))
    }
}

fn checked_list(xs: Vec<i64>) -> Result<Value, EvalError> {
    if xs.len() > DEFAULT_LIST_CAP {
        Err(E::Cap)
    } else {
        Ok(Value::IntList(xs))
    }
}

fn apply_ok(op: &Op, a: &[&Value], inputs: &[Value]) -> Result<Value, EvalError> {
    let arg = |i: usize| a.get(i).copied().ok_or(E::Type);
    Ok(match op {
        Op::Var(i) => inputs.get(*i).cloned().ok_or(E::Range)?,
        Op::Int(n) => Value::Int(*n),
        Op::Str(s) => Value::Str((*s).to_string()),
        Op::Cast | Op::IntToStr => Value::Str(int(arg(0)?)?.to_string()),
        Op::Add => Value::Int(int(arg(0)?)?.checked_add(int(arg(1)?)?).ok_or(E::Overflow)?),
        Op::Concat => checked_str(format!("{}{}", string(arg(0)?)?, string(arg(1)?)?))?,
        Op::Head => Value::Int(*list(arg(0)?)?.first().ok_or(E::Empty)?),
        Op::Last => Value::Int(*list(arg(0)?)?.last().ok_or(E::Empty)?),
        Op::Take => {
            let (n, xs) = (int(arg(0)?)?, list(arg(1)?)?);
            Value::IntList(xs[..n.clamp(0, xs.len() as i64) as usize].to_vec())
        }
        Op::Drop => {
            let (n, xs) = (int(arg(0)?)?, list(arg(1)?)?);
            Value::IntList(xs[n.clamp(0, xs.len() as i64) as usize..].to_vec())
        }
        Op::Access => {
            let (n, xs) = (int(arg(0)?)?, list(arg(1)?)?);
            let i = usize::try_from(n).map_err(|_| E::Range)?;
            Value::Int(*xs.get(i).ok_or(E::Range)?)
        }
        Op::Minimum => Value::Int(*list(arg(0)?)?.iter().min().ok_or(E::Empty)?),
        Op::Maximum => Value::Int(*list(arg(0)?)?.iter().max().ok_or(E::Empty)?),
        Op::Reverse => Value::IntList(list(arg(0)?)?.iter().rev().copied().collect()),
        Op::Sort => {
            let mut xs = list(arg(0)?)?.to_vec();
            xs.sort_unstable();
            Value::IntList(xs)
        }
        Op::Sum => Value::Int(
            list(arg(0)?)?
                .iter()
                .try_fold(0i64, |s, &x| s.checked_add(x))
                .ok_or(E::Overflow)?,
        ),
        Op::Map(l) => Value::IntList(
            list(arg(0)?)?
                .iter()
                .map(|&x| l.apply(x).ok_or(E::Overflow))
                .collect::<Result<_, _>>()?,
        ),
        Op::Filter(p) => Value::IntList(list(arg(0)?)?.iter().copied().filter(|&x| p.test(x)).collect()),
        Op::Count(p) => Value::Int(list(arg(0)?)?.iter().filter(|&&x| p.test(x)).count() as i64),
        Op::ZipWith(z) => {
            let (xs, ys) = (list(arg(0)?)?, list(arg(1)?)?);
            checked_list(
                xs.iter()
                    .zip(ys)
                    .map(|(&x, &y)| z.apply(x, y).ok_or(E::Overflow))
                    .collect::<Result<_, _>>()?,
            )?
        }
        Op::Substr => {
            let s = string(arg(0)?)?;
            let (i, j) = (int(arg(1)?)?, int(arg(2)?)?);
            let n = s.chars().count() as i64;
            if !(0 <= i && i <= j && j <= n) {
                return Err(E::Range);
            }
            Value::Str(s.chars().skip(i as usize).take((j - i) as usize).collect())
        }
        Op::IndexOf => {
            let (s, t) = (string(arg(0)?)?, string(arg(1)?)?);
            Value::Int(s.find(t).map_or(-1, |b| s[..b].chars().count() as i64))
        }
        Op::ToUpper => Value::Str(string(arg(0)?)?.to_uppercase()),
        Op::ToLower => Value::Str(string(arg(0)?)?.to_lowercase()),
        Op::StrToInt => Value::Int(string(arg(0)?)?.trim().parse().map_err(|_| E::Parse)?),
        Op::Len => Value::Int(string(arg(0)?)?.chars().count() as i64),
    })
}
