//! Runtime values of the example DSLs and their text syntax.

use std::fmt;

/// Longest list a program may build.
pub const DEFAULT_LIST_CAP: usize = 512;
/// Longest string a program may build, in characters.
pub const DEFAULT_STR_CAP: usize = 4096;

/// Why an evaluation produced no ordinary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalError {
    Fuel,
    Type,
    Range,
    Empty,
    Overflow,
    DivZero,
    Cap,
    Parse,
}

impl EvalError {
    pub fn name(self) -> &'static str {
        match self {
            EvalError::Fuel => "fuel",
            EvalError::Type => "type",
            EvalError::Range => "range",
            EvalError::Empty => "empty",
            EvalError::Overflow => "overflow",
            EvalError::DivZero => "div-zero",
            EvalError::Cap => "cap",
            EvalError::Parse => "parse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    IntList(Vec<i64>),
    Str(String),
    Bool(bool),
    Error(EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Int,
    List,
    Str,
    Bool,
}

impl ValueType {
    /// Non-terminal name used for this type in DSL grammars.
    pub fn nt_name(self) -> &'static str {
        match self {
            ValueType::Int => "int",
            ValueType::List => "list",
            ValueType::Str => "str",
            ValueType::Bool => "bool",
        }
    }
}

impl Value {
    /// `None` for errors.
    pub fn ty(&self) -> Option<ValueType> {
        match self {
            Value::Int(_) => Some(ValueType::Int),
            Value::IntList(_) => Some(ValueType::List),
            Value::Str(_) => Some(ValueType::Str),
            Value::Bool(_) => Some(ValueType::Bool),
            Value::Error(_) => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Value::Error(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::IntList(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Error(e) => write!(f, "error({})", e.name()),
        }
    }
}

/// Parses one value at the start of `s`; returns it and the unparsed rest.
pub fn parse_value(s: &str) -> Result<(Value, &str), String> {
    let s = s.trim_start();
    let Some(c) = s.chars().next() else {
        return Err("expected a value".into());
    };
    match c {
        '"' => {
            let mut out = String::new();
            let mut chars = s.char_indices().skip(1);
            while let Some((i, c)) = chars.next() {
                match c {
                    '"' => return Ok((Value::Str(out), &s[i + 1..])),
                    '\\' => match chars.next() {
                        Some((_, 'n')) => out.push('\n'),
                        Some((_, 't')) => out.push('\t'),
                        Some((_, c @ ('"' | '\\'))) => out.push(c),
                        Some((_, c)) => return Err(format!("unknown escape `\\{c}`")),
                        None => break,
                    },
                    c => out.push(c),
                }
            }
            Err("unterminated string".into())
        }
        '[' => {
            let mut xs = Vec::new();
            let mut rest = s[1..].trim_start();
            if let Some(r) = rest.strip_prefix(']') {
                return Ok((Value::IntList(xs), r));
            }
            loop {
                let (n, r) = parse_int(rest)?;
                xs.push(n);
                rest = r.trim_start();
                if let Some(r) = rest.strip_prefix(',') {
                    rest = r.trim_start();
                } else if let Some(r) = rest.strip_prefix(']') {
                    return Ok((Value::IntList(xs), r));
                } else {
                    return Err("expected `,` or `]` in list".into());
                }
            }
        }
        _ if s.starts_with("true") => Ok((Value::Bool(true), &s[4..])),
        _ if s.starts_with("false") => Ok((Value::Bool(false), &s[5..])),
        _ => parse_int(s).map(|(n, r)| (Value::Int(n), r)),
    }
}

fn parse_int(s: &str) -> Result<(i64, &str), String> {
    let end = s
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-')))
        .map_or(s.len(), |(i, _)| i);
    let n = s[..end].parse::<i64>().map_err(|_| format!("bad value `{}`", s.split_whitespace().next().unwrap_or(s)))?;
    Ok((n, &s[end..]))
}
