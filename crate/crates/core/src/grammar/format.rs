//! Line-oriented grammar and probability files.
//!
//! ```text
//! # comment
//! start str
//! rule str -> "Hello" cost 1.1
//! rule str -> concat(str, str) cost 5.3
//! ```

use super::{Grammar, GrammarBuilder, GrammarError};
use crate::costs::CostMode;

struct Lexer<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Arrow,
    LParen,
    RParen,
    Comma,
}

impl<'a> Lexer<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Lexer { line, text, pos: 0 }
    }

    fn err(&self, message: impl Into<String>) -> GrammarError {
        GrammarError::Parse {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn next(&mut self) -> Result<Option<(usize, Tok<'a>)>, GrammarError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        let tok = match c {
            '#' => {
                self.pos = self.text.len();
                return Ok(None);
            }
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            ',' => {
                self.pos += 1;
                Tok::Comma
            }
            '-' if rest.starts_with("->") => {
                self.pos += 2;
                Tok::Arrow
            }
            '"' => {
                let mut end = None;
                let mut escaped = false;
                for (i, ch) in rest.char_indices().skip(1) {
                    match ch {
                        '\\' if !escaped => escaped = true,
                        '"' if !escaped => {
                            end = Some(i);
                            break;
                        }
                        _ => escaped = false,
                    }
                }
                let Some(end) = end else {
                    return Err(self.err("unterminated string literal"));
                };
                self.pos += end + 1;
                Tok::Word(&rest[..=end])
            }
            _ => {
                let len = rest
                    .find(|ch: char| ch.is_whitespace() || "(),#\"".contains(ch))
                    .unwrap_or(rest.len());
                self.pos += len;
                Tok::Word(&rest[..len])
            }
        };
        Ok(Some((start, tok)))
    }

    fn expect_word(&mut self, what: &str) -> Result<&'a str, GrammarError> {
        match self.next()? {
            Some((_, Tok::Word(w))) => Ok(w),
            Some((col, t)) => Err(GrammarError::Parse {
                line: self.line,
                column: col + 1,
                message: format!("expected {what}, found {t:?}"),
            }),
            None => Err(self.err(format!("expected {what}, found end of line"))),
        }
    }

    fn expect(&mut self, tok: Tok<'_>, what: &str) -> Result<(), GrammarError> {
        match self.next()? {
            Some((_, t)) if t == tok => Ok(()),
            Some((col, t)) => Err(GrammarError::Parse {
                line: self.line,
                column: col + 1,
                message: format!("expected {what}, found {t:?}"),
            }),
            None => Err(self.err(format!("expected {what}, found end of line"))),
        }
    }

    fn expect_end(&mut self) -> Result<(), GrammarError> {
        match self.next()? {
            None => Ok(()),
            Some((col, t)) => Err(GrammarError::Parse {
                line: self.line,
                column: col + 1,
                message: format!("unexpected trailing {t:?}"),
            }),
        }
    }
}

/// Parses a grammar file without validating it.
pub fn parse_grammar(text: &str, mode: CostMode) -> Result<Grammar, GrammarError> {
    mode.validate()?;
    let mut b = GrammarBuilder::new(mode);
    let mut saw_start = false;
    for (i, raw) in text.lines().enumerate() {
        let mut lx = Lexer::new(i + 1, raw);
        let Some((col, first)) = lx.next()? else {
            continue;
        };
        match first {
            Tok::Word("start") => {
                if saw_start {
                    return Err(lx.err("duplicate `start` header"));
                }
                let name = lx.expect_word("non-terminal name")?;
                lx.expect_end()?;
                b.start(name);
                saw_start = true;
            }
            Tok::Word("rule") => {
                let lhs = lx.expect_word("left-hand side")?;
                lx.expect(Tok::Arrow, "`->`")?;
                let prim = lx.expect_word("primitive name")?;
                let mut rhs = Vec::new();
                let mut kw = lx.next()?;
                if let Some((_, Tok::LParen)) = kw {
                    loop {
                        rhs.push(lx.expect_word("argument non-terminal")?);
                        match lx.next()? {
                            Some((_, Tok::Comma)) => continue,
                            Some((_, Tok::RParen)) => break,
                            _ => return Err(lx.err("expected `,` or `)`")),
                        }
                    }
                    kw = lx.next()?;
                }
                match kw {
                    Some((_, Tok::Word("cost"))) => {}
                    _ => return Err(lx.err("expected `cost`")),
                }
                let col = lx.pos;
                let lit = lx.expect_word("cost value")?;
                let value: f64 = lit.parse().map_err(|_| GrammarError::Parse {
                    line: i + 1,
                    column: col + 2,
                    message: format!("invalid cost `{lit}`"),
                })?;
                let cost = mode.parse_literal(value).map_err(|e| GrammarError::Parse {
                    line: i + 1,
                    column: col + 2,
                    message: e.to_string(),
                })?;
                lx.expect_end()?;
                b.rule(lhs, prim, &rhs, cost);
            }
            t => {
                return Err(GrammarError::Parse {
                    line: i + 1,
                    column: col + 1,
                    message: format!("expected `start` or `rule`, found {t:?}"),
                })
            }
        }
    }
    if b.num_rules() == 0 {
        return Err(GrammarError::Parse {
            line: text.lines().count().max(1),
            column: 1,
            message: "grammar has no rules".into(),
        });
    }
    Ok(b.build())
}

/// Parses and validates a grammar file.
pub fn load_grammar(text: &str, mode: CostMode) -> Result<Grammar, GrammarError> {
    let g = parse_grammar(text, mode)?;
    g.ensure_valid()?;
    Ok(g)
}

/// Canonical text form; `load_grammar(save_grammar(g))` rebuilds `g`.
pub fn save_grammar(g: &Grammar) -> String {
    let mut out = format!("start {}\n", g.nt_name(g.start()));
    for rule in g.rules() {
        let prim = &g.primitives()[rule.primitive].name;
        out.push_str(&format!("rule {} -> {}", g.nt_name(rule.lhs), prim));
        if !rule.rhs.is_empty() {
            let args: Vec<&str> = rule.rhs.iter().map(|&x| g.nt_name(x)).collect();
            out.push_str(&format!("({})", args.join(", ")));
        }
        out.push_str(&format!(" cost {}\n", g.mode().format(rule.cost)));
    }
    out
}

/// Reads `prob <lhs> <primitive> <p>` lines into a per-rule probability
/// vector. Every rule must be covered exactly once.
pub fn parse_probabilities(text: &str, g: &Grammar) -> Result<Vec<f64>, GrammarError> {
    let mut probs: Vec<Option<f64>> = vec![None; g.rules().len()];
    for (i, raw) in text.lines().enumerate() {
        let mut lx = Lexer::new(i + 1, raw);
        let Some((_, first)) = lx.next()? else {
            continue;
        };
        if first != Tok::Word("prob") {
            return Err(lx.err("expected `prob`"));
        }
        let lhs = lx.expect_word("non-terminal")?;
        let prim = lx.expect_word("primitive")?;
        let lit = lx.expect_word("probability")?;
        lx.expect_end()?;
        let p: f64 = lit
            .parse()
            .map_err(|_| lx.err(format!("invalid probability `{lit}`")))?;
        let rule = g
            .nt_by_name(lhs)
            .and_then(|x| g.find_rule(x, prim))
            .ok_or_else(|| lx.err(format!("no rule `{lhs} -> {prim}`")))?;
        if probs[rule.index()].replace(p).is_some() {
            return Err(lx.err(format!("duplicate probability for `{lhs} -> {prim}`")));
        }
    }
    probs
        .into_iter()
        .enumerate()
        .map(|(r, p)| {
            p.ok_or_else(|| {
                let rule = &g.rules()[r];
                GrammarError::Other(format!(
                    "missing probability for `{} -> {}`",
                    g.nt_name(rule.lhs),
                    g.primitives()[rule.primitive].name
                ))
            })
        })
        .collect()
}
