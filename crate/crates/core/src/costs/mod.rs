//! Cost values, discretisation of real and probabilistic costs, and the
//! successor-gap estimator used to size bucket queues.
//!
//! Every cost is stored as a positive integer number of *units*. In
//! [`CostMode::Integer`] a unit is whatever the grammar author wrote (or
//! `delta` nats when costs come from probabilities); in [`CostMode::Real`] a
//! unit is the rounding granularity `rho`, so real costs are compared only
//! after rounding. Keeping one integer representation means every enumerator
//! and queue compares costs exactly.

mod gap;

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use thiserror::Error;

use crate::grammar::{Grammar, RuleId};
use crate::terms::Term;

pub(crate) use gap::finite_max as finite_max_costs;
pub use gap::{estimate_successor_gap, realized_costs, GapEstimate, GapMethod, DEFAULT_PROBE_BUDGET};

/// Default log-space discretisation step for probabilities.
pub const DEFAULT_DELTA: f64 = 1e-5;
/// Default rounding granularity for real-valued costs.
pub const DEFAULT_RHO: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("invalid probability {0}: must lie in (0, 1]")]
    InvalidProbability(f64),
    #[error("cost {0} is not positive")]
    NonPositive(f64),
    #[error("cost {0} is not an integer (integer cost mode)")]
    NonIntegral(f64),
    #[error("cost overflow while summing program costs")]
    Overflow,
    #[error("invalid cost mode parameter {0}")]
    InvalidParameter(f64),
    #[error("expected {expected} rule costs, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A cost expressed in integer units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(pub u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    #[inline]
    pub fn units(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn checked_add(self, rhs: Cost) -> Option<Cost> {
        self.0.checked_add(rhs.0).map(Cost)
    }

    /// `self + rhs - sub`, the incremental cost update of a cost tuple.
    #[inline]
    pub fn shifted(self, add: Cost, sub: Cost) -> Option<Cost> {
        self.0.checked_add(add.0)?.checked_sub(sub.0).map(Cost)
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        self.checked_add(rhs).expect("cost overflow")
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How raw cost literals map onto integer units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostMode {
    /// Integer costs. Literals must be whole numbers; probabilities are
    /// discretised in steps of `delta` nats.
    Integer { delta: f64 },
    /// Real costs rounded to multiples of `rho`.
    Real { rho: f64 },
}

impl Default for CostMode {
    fn default() -> Self {
        CostMode::Integer {
            delta: DEFAULT_DELTA,
        }
    }
}

impl CostMode {
    pub fn integer() -> Self {
        CostMode::default()
    }

    pub fn real() -> Self {
        CostMode::Real { rho: DEFAULT_RHO }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let v = match *self {
            CostMode::Integer { delta } => delta,
            CostMode::Real { rho } => rho,
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(CostError::InvalidParameter(v))
        }
    }

    /// Size of one unit when costs are derived from `-ln p`.
    pub fn log_unit(&self) -> f64 {
        match *self {
            CostMode::Integer { delta } => delta,
            CostMode::Real { rho } => rho,
        }
    }

    /// Short name used in CSV output and configuration dumps.
    pub fn name(&self) -> &'static str {
        match self {
            CostMode::Integer { .. } => "int",
            CostMode::Real { .. } => "real",
        }
    }

    /// Converts a cost literal from a grammar file.
    pub fn parse_literal(&self, value: f64) -> Result<Cost, CostError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(CostError::NonPositive(value));
        }
        match *self {
            CostMode::Integer { .. } => {
                if value.fract() != 0.0 || value > u64::MAX as f64 {
                    return Err(CostError::NonIntegral(value));
                }
                Ok(Cost(value as u64))
            }
            CostMode::Real { rho } => Ok(Cost(((value / rho).round() as u64).max(1))),
        }
    }

    /// Discretises a rule probability: `max(1, round(-ln p / unit))`.
    pub fn from_probability(&self, p: f64) -> Result<Cost, CostError> {
        discretize_probability(p, self.log_unit())
    }

    fn decimals(&self) -> usize {
        match *self {
            CostMode::Integer { .. } => 0,
            CostMode::Real { rho } => {
                let mut d = 0;
                let mut scaled = rho;
                while d < 12 && (scaled - scaled.round()).abs() > 1e-9 * scaled.max(1.0) {
                    scaled *= 10.0;
                    d += 1;
                }
                d
            }
        }
    }

    /// Renders a cost in the units it was written in.
    pub fn format(&self, cost: Cost) -> String {
        match *self {
            CostMode::Integer { .. } => cost.0.to_string(),
            CostMode::Real { rho } => {
                format!("{:.*}", self.decimals(), cost.0 as f64 * rho)
            }
        }
    }

    /// Cost as a real number (units times the unit size for real mode).
    pub fn to_f64(&self, cost: Cost) -> f64 {
        match *self {
            CostMode::Integer { .. } => cost.0 as f64,
            CostMode::Real { rho } => cost.0 as f64 * rho,
        }
    }
}

impl FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int" | "integer" => Ok(CostMode::integer()),
            "real" => Ok(CostMode::real()),
            other => Err(format!("unknown cost mode `{other}` (expected int or real)")),
        }
    }
}

/// `max(1, round(-ln p / unit))`.
pub fn discretize_probability(p: f64, unit: f64) -> Result<Cost, CostError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(CostError::InvalidProbability(p));
    }
    if !(unit.is_finite() && unit > 0.0) {
        return Err(CostError::InvalidParameter(unit));
    }
    let units = (-p.ln() / unit).round();
    Ok(Cost((units as u64).max(1)))
}

/// Per-rule costs together with the mode they were produced in.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub mode: CostMode,
    pub rule_costs: Vec<Cost>,
}

impl CostModel {
    pub fn of_grammar(g: &Grammar) -> Self {
        CostModel {
            mode: g.mode(),
            rule_costs: g.rules().iter().map(|r| r.cost).collect(),
        }
    }

    /// Builds integer costs from rule probabilities indexed by rule id.
    pub fn from_probabilities(probs: &[f64], mode: CostMode) -> Result<Self, CostError> {
        mode.validate()?;
        let rule_costs = probs
            .iter()
            .map(|&p| mode.from_probability(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CostModel { mode, rule_costs })
    }

    pub fn cost(&self, rule: RuleId) -> Cost {
        self.rule_costs[rule.index()]
    }
}

/// Recursive pre-generation cost of a program tree.
pub fn program_cost(p: &Term, g: &Grammar) -> Result<Cost, CostError> {
    let mut total = g.rule(p.rule).cost;
    for child in &p.children {
        total = total
            .checked_add(program_cost(child, g)?)
            .ok_or(CostError::Overflow)?;
    }
    Ok(total)
}
