//! Weighted deterministic tree grammars.
//!
//! Non-terminals and rules carry dense integer ids so that every enumerator
//! can keep its per-non-terminal state in plain vectors.

mod families;
mod format;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::costs::{Cost, CostError, CostMode, CostModel};
use crate::terms::Term;

pub use families::{make_family, random_grammar, CostAssignment, Family, RandomGrammarParams};
pub use format::{load_grammar, parse_grammar, parse_probabilities, save_grammar};

/// Index of a non-terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nt(pub u32);

impl Nt {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a derivation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub u32);

impl RuleId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Primitive {
    pub name: String,
    pub arity: usize,
}

/// `lhs -> primitive(rhs...)` with a positive cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub lhs: Nt,
    pub primitive: usize,
    pub rhs: Vec<Nt>,
    pub cost: Cost,
}

impl Rule {
    #[inline]
    pub fn arity(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid grammar: {0}")]
    Invalid(ValidationReport),
    #[error("non-terminal `{0}` does not derive any finite program")]
    Unproductive(String),
    #[error("family {family} requires k >= {min}, got {k}")]
    InvalidK { family: Family, k: usize, min: usize },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("{0}")]
    Other(String),
}

/// One problem found by [`Grammar::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoRules,
    DuplicateRule { lhs: String, primitive: String },
    NonPositiveCost { rule: usize },
    ArityMismatch { rule: usize, primitive: String, expected: usize, got: usize },
    Unproductive { nonterminal: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoRules => write!(f, "grammar has no rules"),
            Violation::DuplicateRule { lhs, primitive } => write!(
                f,
                "determinism: more than one rule `{lhs} -> {primitive}(...)`"
            ),
            Violation::NonPositiveCost { rule } => write!(f, "rule r{} has a non-positive cost", rule + 1),
            Violation::ArityMismatch {
                rule,
                primitive,
                expected,
                got,
            } => write!(
                f,
                "rule r{}: primitive `{primitive}` has arity {expected} but {got} arguments",
                rule + 1
            ),
            Violation::Unproductive { nonterminal } => {
                write!(f, "unproductive non-terminal `{nonterminal}`")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Minimal-cost program and its cost for every non-terminal.
#[derive(Debug, Clone)]
pub struct MinPrograms {
    pub costs: Vec<Cost>,
    pub programs: Vec<Term>,
    /// Number of passes of the propagation loop (including the final one
    /// that changes nothing).
    pub iterations: usize,
}

impl MinPrograms {
    pub fn cost(&self, x: Nt) -> Cost {
        self.costs[x.index()]
    }

    pub fn program(&self, x: Nt) -> &Term {
        &self.programs[x.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    mode: CostMode,
    nonterminals: Vec<String>,
    primitives: Vec<Primitive>,
    rules: Vec<Rule>,
    start: Nt,
    rules_by_lhs: Vec<Vec<RuleId>>,
}

impl Grammar {
    pub fn mode(&self) -> CostMode {
        self.mode
    }

    pub fn start(&self) -> Nt {
        self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    #[inline]
    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    pub fn rules_for(&self, x: Nt) -> &[RuleId] {
        &self.rules_by_lhs[x.index()]
    }

    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = Nt> {
        (0..self.nonterminals.len() as u32).map(Nt)
    }

    pub fn nt_name(&self, x: Nt) -> &str {
        &self.nonterminals[x.index()]
    }

    pub fn nt_by_name(&self, name: &str) -> Option<Nt> {
        self.nonterminals
            .iter()
            .position(|n| n == name)
            .map(|i| Nt(i as u32))
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn primitive_of(&self, rule: RuleId) -> &Primitive {
        &self.primitives[self.rule(rule).primitive]
    }

    pub fn max_arity(&self) -> usize {
        self.rules.iter().map(Rule::arity).max().unwrap_or(0)
    }

    /// Rule `lhs -> primitive(..)` if present.
    pub fn find_rule(&self, lhs: Nt, primitive: &str) -> Option<RuleId> {
        self.rules_for(lhs)
            .iter()
            .copied()
            .find(|&r| self.primitive_of(r).name == primitive)
    }

    /// Same grammar with a different start non-terminal.
    pub fn with_start(&self, start: Nt) -> Grammar {
        let mut g = self.clone();
        g.start = start;
        g
    }

    /// Replaces every rule cost with the one from `model`.
    pub fn with_cost_model(&self, model: &CostModel) -> Result<Grammar, CostError> {
        if model.rule_costs.len() != self.rules.len() {
            return Err(CostError::LengthMismatch {
                expected: self.rules.len(),
                got: model.rule_costs.len(),
            });
        }
        let mut g = self.clone();
        g.mode = model.mode;
        for (rule, &c) in g.rules.iter_mut().zip(&model.rule_costs) {
            rule.cost = c;
        }
        Ok(g)
    }

    /// Checks determinism, cost positivity, arities and productivity.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.rules.is_empty() {
            violations.push(Violation::NoRules);
            return ValidationReport { violations };
        }
        let mut seen: HashMap<(Nt, usize), RuleId> = HashMap::new();
        for rule in &self.rules {
            if seen.insert((rule.lhs, rule.primitive), rule.id).is_some() {
                violations.push(Violation::DuplicateRule {
                    lhs: self.nt_name(rule.lhs).to_string(),
                    primitive: self.primitives[rule.primitive].name.clone(),
                });
            }
            if rule.cost == Cost::ZERO {
                violations.push(Violation::NonPositiveCost {
                    rule: rule.id.index(),
                });
            }
            let prim = &self.primitives[rule.primitive];
            if prim.arity != rule.rhs.len() {
                violations.push(Violation::ArityMismatch {
                    rule: rule.id.index(),
                    primitive: prim.name.clone(),
                    expected: prim.arity,
                    got: rule.rhs.len(),
                });
            }
        }
        let productive = self.productive();
        for x in self.nonterminals() {
            if !productive[x.index()] {
                violations.push(Violation::Unproductive {
                    nonterminal: self.nt_name(x).to_string(),
                });
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), GrammarError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(GrammarError::Invalid(report))
        }
    }

    fn productive(&self) -> Vec<bool> {
        let mut productive = vec![false; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for rule in &self.rules {
                if !productive[rule.lhs.index()] && rule.rhs.iter().all(|x| productive[x.index()]) {
                    productive[rule.lhs.index()] = true;
                    changed = true;
                }
            }
        }
        productive
    }

    /// Minimal-cost program for every non-terminal by fixpoint propagation:
    /// constants first, then repeated relaxation over all rules until no
    /// cost improves.
    pub fn compute_min_programs(&self) -> Result<MinPrograms, GrammarError> {
        let n = self.nonterminals.len();
        let mut costs: Vec<Option<Cost>> = vec![None; n];
        let mut best_rule: Vec<Option<RuleId>> = vec![None; n];
        for rule in self.rules.iter().filter(|r| r.rhs.is_empty()) {
            let x = rule.lhs.index();
            if costs[x].is_none_or(|c| rule.cost < c) {
                costs[x] = Some(rule.cost);
                best_rule[x] = Some(rule.id);
            }
        }
        let mut iterations = 0;
        let mut updated = true;
        while updated {
            updated = false;
            iterations += 1;
            for rule in self.rules.iter().filter(|r| !r.rhs.is_empty()) {
                let mut c = Some(rule.cost);
                for arg in &rule.rhs {
                    c = match (c, costs[arg.index()]) {
                        (Some(a), Some(b)) => Some(a.checked_add(b).ok_or(CostError::Overflow)?),
                        _ => None,
                    };
                }
                let Some(c) = c else { continue };
                let x = rule.lhs.index();
                if costs[x].is_none_or(|cur| c < cur) {
                    costs[x] = Some(c);
                    best_rule[x] = Some(rule.id);
                    updated = true;
                }
            }
        }
        let costs = costs
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| GrammarError::Unproductive(self.nonterminals[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        // Rebuild the programs from the argmin rules; the rule graph restricted
        // to argmin choices is acyclic because costs strictly decrease.
        let mut programs: Vec<Option<Term>> = vec![None; n];
        fn build(g: &Grammar, x: usize, best: &[Option<RuleId>], memo: &mut Vec<Option<Term>>) -> Term {
            if let Some(t) = &memo[x] {
                return t.clone();
            }
            let rule = g.rule(best[x].expect("productive"));
            let children = rule.rhs.iter().map(|a| build(g, a.index(), best, memo)).collect();
            let t = Term::new(rule.id, children);
            memo[x] = Some(t.clone());
            t
        }
        for x in 0..n {
            build(self, x, &best_rule, &mut programs);
        }
        Ok(MinPrograms {
            costs,
            programs: programs.into_iter().map(|p| p.expect("built")).collect(),
            iterations,
        })
    }

    /// Non-terminals occurring in some derivation from `x`, `x` included.
    pub fn reachable_from(&self, x: Nt) -> Vec<bool> {
        let mut seen = vec![false; self.nonterminals.len()];
        let mut stack = vec![x];
        seen[x.index()] = true;
        while let Some(y) = stack.pop() {
            for &r in self.rules_for(y) {
                for a in &self.rule(r).rhs {
                    if !seen[a.index()] {
                        seen[a.index()] = true;
                        stack.push(*a);
                    }
                }
            }
        }
        seen
    }

    /// Non-terminals whose language is infinite.
    pub fn infinite_nonterminals(&self) -> Vec<bool> {
        let n = self.nonterminals.len();
        // reach[x][y]: y reachable from x in one or more steps
        let mut reach = vec![vec![false; n]; n];
        for rule in &self.rules {
            for a in &rule.rhs {
                reach[rule.lhs.index()][a.index()] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        (0..n)
            .map(|x| reach[x][x] || (0..n).any(|y| reach[x][y] && reach[y][y]))
            .collect()
    }
}

/// Incremental grammar construction. Non-terminals and primitives are
/// registered on first mention; [`GrammarBuilder::build`] does not validate.
#[derive(Debug, Clone)]
pub struct GrammarBuilder {
    mode: CostMode,
    nonterminals: Vec<String>,
    nt_index: HashMap<String, Nt>,
    primitives: Vec<Primitive>,
    prim_index: HashMap<String, usize>,
    rules: Vec<Rule>,
    start: Option<Nt>,
}

impl GrammarBuilder {
    pub fn new(mode: CostMode) -> Self {
        GrammarBuilder {
            mode,
            nonterminals: Vec::new(),
            nt_index: HashMap::new(),
            primitives: Vec::new(),
            prim_index: HashMap::new(),
            rules: Vec::new(),
            start: None,
        }
    }

    pub fn nonterminal(&mut self, name: &str) -> Nt {
        if let Some(&x) = self.nt_index.get(name) {
            return x;
        }
        let x = Nt(self.nonterminals.len() as u32);
        self.nonterminals.push(name.to_string());
        self.nt_index.insert(name.to_string(), x);
        x
    }

    pub fn start(&mut self, name: &str) -> &mut Self {
        let x = self.nonterminal(name);
        self.start = Some(x);
        self
    }

    pub fn has_start(&self) -> bool {
        self.start.is_some()
    }

    /// Adds `lhs -> primitive(rhs...)`. A primitive keeps the arity of its
    /// first use.
    pub fn rule(&mut self, lhs: &str, primitive: &str, rhs: &[&str], cost: Cost) -> &mut Self {
        let lhs = self.nonterminal(lhs);
        let rhs: Vec<Nt> = rhs.iter().map(|a| self.nonterminal(a)).collect();
        let prim = match self.prim_index.get(primitive) {
            Some(&p) => p,
            None => {
                self.primitives.push(Primitive {
                    name: primitive.to_string(),
                    arity: rhs.len(),
                });
                self.prim_index.insert(primitive.to_string(), self.primitives.len() - 1);
                self.primitives.len() - 1
            }
        };
        self.rules.push(Rule {
            id: RuleId(self.rules.len() as u32),
            lhs,
            primitive: prim,
            rhs,
            cost,
        });
        self
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn build(&self) -> Grammar {
        let start = self
            .start
            .or_else(|| self.rules.first().map(|r| r.lhs))
            .unwrap_or(Nt(0));
        let mut nonterminals = self.nonterminals.clone();
        if nonterminals.is_empty() {
            nonterminals.push("S".to_string());
        }
        let mut rules_by_lhs = vec![Vec::new(); nonterminals.len()];
        for rule in &self.rules {
            rules_by_lhs[rule.lhs.index()].push(rule.id);
        }
        Grammar {
            mode: self.mode,
            nonterminals,
            primitives: self.primitives.clone(),
            rules: self.rules.clone(),
            start,
            rules_by_lhs,
        }
    }
}

/// The two-type string/int grammar used throughout the docs and tests, with
/// costs 1.1, 2.0, 4.4, 5.3, 1.8, 3.3, 5.3 in the given mode. In integer mode
/// the costs are scaled by ten.
pub fn running_example(mode: CostMode) -> Grammar {
    let costs: [f64; 7] = [1.1, 2.0, 4.4, 5.3, 1.8, 3.3, 5.3];
    let c = |i: usize| match mode {
        CostMode::Integer { .. } => Cost((costs[i] * 10.0).round() as u64),
        CostMode::Real { .. } => mode.parse_literal(costs[i]).expect("positive"),
    };
    let mut b = GrammarBuilder::new(mode);
    b.start("str")
        .rule("str", "\"Hello\"", &[], c(0))
        .rule("str", "\"World\"", &[], c(1))
        .rule("str", "cast", &["int"], c(2))
        .rule("str", "concat", &["str", "str"], c(3))
        .rule("int", "var", &[], c(4))
        .rule("int", "1", &[], c(5))
        .rule("int", "add", &["int", "int"], c(6));
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_example_is_valid() {
        let g = running_example(CostMode::real());
        assert!(g.validate().is_ok());
        assert_eq!(g.rules().len(), 7);
        assert_eq!(g.nt_name(g.start()), "str");
    }

    #[test]
    fn min_programs_running_example() {
        let g = running_example(CostMode::real());
        let mp = g.compute_min_programs().unwrap();
        let s = g.nt_by_name("str").unwrap();
        let i = g.nt_by_name("int").unwrap();
        assert_eq!(mp.cost(s), Cost(110));
        assert_eq!(mp.cost(i), Cost(180));
        assert_eq!(mp.program(s).render(&g), "\"Hello\"");
        assert_eq!(mp.program(i).render(&g), "var");
        // constants already optimal, one confirming pass
        assert_eq!(mp.iterations, 1);
    }

    #[test]
    fn duplicate_rule_is_a_determinism_violation() {
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.rule("str", "\"Hello\"", &[], Cost(1))
            .rule("str", "\"Hello\"", &[], Cost(2));
        let report = b.build().validate();
        assert!(matches!(report.violations[0], Violation::DuplicateRule { .. }));
        assert!(report.to_string().contains("determinism"));
    }

    #[test]
    fn unproductive_grammar() {
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.rule("S", "f", &["S"], Cost(1));
        let g = b.build();
        assert_eq!(
            g.validate().violations,
            vec![Violation::Unproductive {
                nonterminal: "S".into()
            }]
        );
        assert!(matches!(g.compute_min_programs(), Err(GrammarError::Unproductive(_))));
    }

    #[test]
    fn arity_mismatch_and_zero_cost() {
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.rule("S", "a", &[], Cost(0))
            .rule("S", "f", &["S"], Cost(1))
            .rule("T", "f", &["S", "S"], Cost(1));
        let v = b.build().validate().violations;
        assert!(v.contains(&Violation::NonPositiveCost { rule: 0 }));
        assert!(v.iter().any(|x| matches!(x, Violation::ArityMismatch { rule: 2, .. })));
    }

    #[test]
    fn single_rule_min_program() {
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.rule("S", "a", &[], Cost(5));
        let g = b.build();
        let mp = g.compute_min_programs().unwrap();
        assert_eq!(mp.cost(Nt(0)), Cost(5));
        assert_eq!(mp.program(Nt(0)).render(&g), "a");
    }

    #[test]
    fn infinite_detection() {
        let g = running_example(CostMode::integer());
        assert_eq!(g.infinite_nonterminals(), vec![true, true]);
        let mut b = GrammarBuilder::new(CostMode::integer());
        b.rule("S", "f", &["T"], Cost(1)).rule("T", "a", &[], Cost(1));
        assert_eq!(b.build().infinite_nonterminals(), vec![false, false]);
    }
}
