//! Program trees.
//!
//! [`Term`] is the owned, self-contained tree handed to users. Enumerators
//! keep programs in a [`ProgramStore`], an arena where a program is a rule id
//! plus the ids of its children, so subtrees are shared rather than copied.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::costs::Cost;
use crate::grammar::{Grammar, RuleId};

/// An immutable program: the rule applied at the root and its arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub rule: RuleId,
    pub children: Vec<Term>,
}

impl Term {
    pub fn new(rule: RuleId, children: Vec<Term>) -> Self {
        Term { rule, children }
    }

    pub fn leaf(rule: RuleId) -> Self {
        Term {
            rule,
            children: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Term::depth).max().unwrap_or(0)
    }

    /// `f(a, b)`; constants render as their bare name.
    pub fn render(&self, g: &Grammar) -> String {
        let mut out = String::new();
        self.render_into(g, &mut out);
        out
    }

    fn render_into(&self, g: &Grammar, out: &mut String) {
        out.push_str(&g.primitive_of(self.rule).name);
        if !self.children.is_empty() {
            out.push('(');
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                c.render_into(g, out);
            }
            out.push(')');
        }
    }

    /// True when every child is derivable from the matching argument of its
    /// parent's rule.
    pub fn is_well_formed(&self, g: &Grammar) -> bool {
        let rule = g.rule(self.rule);
        rule.rhs.len() == self.children.len()
            && rule
                .rhs
                .iter()
                .zip(&self.children)
                .all(|(&x, c)| g.rule(c.rule).lhs == x && c.is_well_formed(g))
    }
}

/// Handle to a program in a [`ProgramStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramId(pub u32);

impl ProgramId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    rule: RuleId,
    cost: Cost,
    first_child: u32,
    arity: u32,
}

type Key = (RuleId, SmallVec<[ProgramId; 4]>);

/// Arena of programs with shared subtrees. With interning enabled, equal
/// trees map to the same id; without it, callers guarantee uniqueness.
#[derive(Debug, Clone, Default)]
pub struct ProgramStore {
    nodes: Vec<Node>,
    children: Vec<ProgramId>,
    interned: Option<HashMap<Key, ProgramId>>,
}

impl ProgramStore {
    pub fn new() -> Self {
        ProgramStore::default()
    }

    pub fn interning() -> Self {
        ProgramStore {
            interned: Some(HashMap::new()),
            ..ProgramStore::default()
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Appends a program without checking for an existing copy.
    pub fn add(&mut self, rule: RuleId, children: &[ProgramId], cost: Cost) -> ProgramId {
        let id = ProgramId(self.nodes.len() as u32);
        self.nodes.push(Node {
            rule,
            cost,
            first_child: self.children.len() as u32,
            arity: children.len() as u32,
        });
        self.children.extend_from_slice(children);
        if let Some(map) = &mut self.interned {
            map.insert((rule, SmallVec::from_slice(children)), id);
        }
        id
    }

    /// Existing id of `rule(children)` in an interning store.
    pub fn lookup(&self, rule: RuleId, children: &[ProgramId]) -> Option<ProgramId> {
        self.interned
            .as_ref()
            .and_then(|m| m.get(&(rule, SmallVec::from_slice(children))).copied())
    }

    /// Returns the id of `rule(children)`, adding it if new. The flag is true
    /// when the program was added.
    pub fn intern(&mut self, rule: RuleId, children: &[ProgramId], cost: Cost) -> (ProgramId, bool) {
        match self.lookup(rule, children) {
            Some(id) => (id, false),
            None => (self.add(rule, children, cost), true),
        }
    }

    #[inline]
    pub fn rule(&self, p: ProgramId) -> RuleId {
        self.nodes[p.index()].rule
    }

    #[inline]
    pub fn cost(&self, p: ProgramId) -> Cost {
        self.nodes[p.index()].cost
    }

    #[inline]
    pub fn children(&self, p: ProgramId) -> &[ProgramId] {
        let n = &self.nodes[p.index()];
        &self.children[n.first_child as usize..(n.first_child + n.arity) as usize]
    }

    pub fn to_term(&self, p: ProgramId) -> Term {
        Term::new(
            self.rule(p),
            self.children(p).iter().map(|&c| self.to_term(c)).collect(),
        )
    }

    pub fn render(&self, p: ProgramId, g: &Grammar) -> String {
        self.to_term(p).render(g)
    }

    /// Adds a whole tree, reusing shared subtrees when interning.
    pub fn insert_term(&mut self, t: &Term, g: &Grammar) -> ProgramId {
        let kids: SmallVec<[ProgramId; 4]> = t.children.iter().map(|c| self.insert_term(c, g)).collect();
        let mut cost = g.rule(t.rule).cost;
        for &k in &kids {
            cost = cost + self.cost(k);
        }
        if self.interned.is_some() {
            self.intern(t.rule, &kids, cost).0
        } else {
            self.add(t.rule, &kids, cost)
        }
    }
}
