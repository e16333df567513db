//! Networks of timed automata with shared bounded integer variables.
//!
//! A [`Network`] is an ordered list of [`Automaton`]s over a shared set of
//! integer variables (each with declared bounds) and a shared set of clocks.
//! A [`Configuration`] holds one location per automaton, a total integer
//! assignment for the variables, and a total rational valuation for the
//! clocks. Two kinds of steps move a configuration forward:
//!
//! * a *delay* advances every clock by the same nonnegative rational, and is
//!   blocked for positive amounts while any automaton sits in an urgent
//!   location (zero-length delays are always permitted),
//! * an *internal* step fires one transition of one automaton, checking its
//!   source location, its condition over the variables, and its clock guard,
//!   then applying its variable updates simultaneously against the old
//!   assignment and resetting its clocks to zero.
//!
//! There is no synchronization primitive: automata interact only through the
//! shared variables, exactly one transition fires at a time.
//!
//! [`Run`]s record a start configuration and a step sequence together with
//! the configuration after each step; [`Run::replay`] re-executes the labels
//! and demands exact agreement, making runs self-contained certificates.

mod run;
mod semantics;

pub use run::{run_check, Divergence, DivergenceReason, Run, RunStep};
pub use semantics::{eval_bool, eval_expr, guard_satisfied, StepError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rat::Rat;

pub type VarId = String;
pub type ClockId = String;
pub type LocationId = String;

/// Comparison relation used in clock guards and expression comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Rel {
    pub fn holds(&self, left: &Rat, right: &Rat) -> bool {
        match self {
            Rel::Lt => left < right,
            Rel::Le => left <= right,
            Rel::Eq => left == right,
            Rel::Ge => left >= right,
            Rel::Gt => left > right,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        };
        write!(f, "{s}")
    }
}

/// A guard atom: one clock compared against a rational constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConstraint {
    pub clock: ClockId,
    pub rel: Rel,
    pub bound: Rat,
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.clock, self.rel, self.bound)
    }
}

/// Arithmetic operator in integer-variable expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
}

/// An arithmetic expression over the shared variables.
///
/// Evaluation is exact over rationals; update results must land back on an
/// integer within the target variable's bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Expr {
    Var {
        id: VarId,
    },
    Const {
        value: Rat,
    },
    Binop {
        op: Op,
        left: Box<Expr>,
        right: Box<Expr>,
    },
}

impl Expr {
    pub fn var(id: impl Into<VarId>) -> Expr {
        Expr::Var { id: id.into() }
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const {
            value: Rat::from_int(n),
        }
    }

    pub fn add(left: Expr, right: Expr) -> Expr {
        Expr::Binop {
            op: Op::Add,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn sub(left: Expr, right: Expr) -> Expr {
        Expr::Binop {
            op: Op::Sub,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var { id } => write!(f, "{id}"),
            Expr::Const { value } => write!(f, "{value}"),
            Expr::Binop { op, left, right } => {
                let op = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                    Op::Div => "/",
                };
                write!(f, "({left} {op} {right})")
            }
        }
    }
}

/// A Boolean condition over the shared variables.
///
/// `True` exists so vacuous conditions (empty conjunctions) have a direct
/// representation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BExpr {
    True,
    False,
    Cmp { rel: Rel, left: Expr, right: Expr },
    And { left: Box<BExpr>, right: Box<BExpr> },
}

impl BExpr {
    /// `var = n`, the workhorse comparison of the encoding.
    pub fn var_eq_int(id: impl Into<VarId>, n: i64) -> BExpr {
        BExpr::Cmp {
            rel: Rel::Eq,
            left: Expr::var(id),
            right: Expr::int(n),
        }
    }

    /// Conjunction that elides `True` operands.
    pub fn and(self, other: BExpr) -> BExpr {
        match (self, other) {
            (BExpr::True, b) => b,
            (a, BExpr::True) => a,
            (a, b) => BExpr::And {
                left: Box::new(a),
                right: Box::new(b),
            },
        }
    }

    /// Left-fold conjunction of all operands; `True` when empty.
    pub fn and_all(parts: impl IntoIterator<Item = BExpr>) -> BExpr {
        parts.into_iter().fold(BExpr::True, BExpr::and)
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BExpr::True => write!(f, "true"),
            BExpr::False => write!(f, "false"),
            BExpr::Cmp { rel, left, right } => write!(f, "{left} {rel} {right}"),
            BExpr::And { left, right } => write!(f, "({left}) && ({right})"),
        }
    }
}

/// One variable update `var := expr`, evaluated against the pre-transition
/// assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Update {
    pub var: VarId,
    pub expr: Expr,
}

impl Update {
    pub fn set(var: impl Into<VarId>, n: i64) -> Update {
        Update {
            var: var.into(),
            expr: Expr::int(n),
        }
    }

    /// `var := var + n` (use a negative `n` to decrement).
    pub fn shift(var: impl Into<VarId>, n: i64) -> Update {
        let var = var.into();
        Update {
            expr: Expr::add(Expr::var(var.clone()), Expr::int(n)),
            var,
        }
    }
}

/// One transition of one automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub from: LocationId,
    pub cond: BExpr,
    pub guard: Vec<ClockConstraint>,
    pub updates: Vec<Update>,
    pub resets: Vec<ClockId>,
    pub to: LocationId,
    pub label: String,
}

/// A timed automaton with urgent locations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Automaton {
    pub name: String,
    pub locations: Vec<LocationId>,
    pub initial: LocationId,
    pub urgent: Vec<LocationId>,
    pub transitions: Vec<Transition>,
}

/// Declaration of a shared bounded integer variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDecl {
    pub id: VarId,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

/// An ordered network of timed automata over shared variables and clocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub vars: Vec<VarDecl>,
    pub clocks: Vec<ClockId>,
    pub automata: Vec<Automaton>,
}

/// Structural inconsistency in a network description.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("duplicate variable `{0}`")]
    DuplicateVar(VarId),
    #[error("duplicate clock `{0}`")]
    DuplicateClock(ClockId),
    #[error("variable `{id}` has init {init} outside [{lo}, {hi}]")]
    InitOutOfBounds {
        id: VarId,
        init: i64,
        lo: i64,
        hi: i64,
    },
    #[error("automaton `{automaton}`: location `{location}` is not declared")]
    UnknownLocation {
        automaton: String,
        location: LocationId,
    },
    #[error("automaton `{automaton}` transition {index}: unknown variable `{var}`")]
    UnknownVar {
        automaton: String,
        index: usize,
        var: VarId,
    },
    #[error("automaton `{automaton}` transition {index}: unknown clock `{clock}`")]
    UnknownClock {
        automaton: String,
        index: usize,
        clock: ClockId,
    },
    #[error("automaton `{automaton}` transition {index}: variable `{var}` updated more than once")]
    DuplicateUpdate {
        automaton: String,
        index: usize,
        var: VarId,
    },
    #[error("automaton `{automaton}` transition {index}: guard bound {bound} is negative")]
    NegativeGuardBound {
        automaton: String,
        index: usize,
        bound: Rat,
    },
}

fn expr_vars<'e>(expr: &'e Expr, out: &mut Vec<&'e VarId>) {
    match expr {
        Expr::Var { id } => out.push(id),
        Expr::Const { .. } => {}
        Expr::Binop { left, right, .. } => {
            expr_vars(left, out);
            expr_vars(right, out);
        }
    }
}

fn bexpr_vars<'e>(bexpr: &'e BExpr, out: &mut Vec<&'e VarId>) {
    match bexpr {
        BExpr::True | BExpr::False => {}
        BExpr::Cmp { left, right, .. } => {
            expr_vars(left, out);
            expr_vars(right, out);
        }
        BExpr::And { left, right } => {
            bexpr_vars(left, out);
            bexpr_vars(right, out);
        }
    }
}

impl Network {
    /// Checks the structural invariants: unique ids, all references declared,
    /// at most one update per variable per transition, nonnegative guard
    /// bounds, initial values within bounds.
    pub fn check(&self) -> Result<(), NetworkError> {
        let mut var_ids = BTreeSet::new();
        for v in &self.vars {
            if !var_ids.insert(&v.id) {
                return Err(NetworkError::DuplicateVar(v.id.clone()));
            }
            if v.init < v.lo || v.init > v.hi {
                return Err(NetworkError::InitOutOfBounds {
                    id: v.id.clone(),
                    init: v.init,
                    lo: v.lo,
                    hi: v.hi,
                });
            }
        }
        let mut clock_ids = BTreeSet::new();
        for c in &self.clocks {
            if !clock_ids.insert(c) {
                return Err(NetworkError::DuplicateClock(c.clone()));
            }
        }
        for automaton in &self.automata {
            let locations: BTreeSet<&LocationId> = automaton.locations.iter().collect();
            let check_loc = |l: &LocationId| -> Result<(), NetworkError> {
                if locations.contains(l) {
                    Ok(())
                } else {
                    Err(NetworkError::UnknownLocation {
                        automaton: automaton.name.clone(),
                        location: l.clone(),
                    })
                }
            };
            check_loc(&automaton.initial)?;
            for u in &automaton.urgent {
                check_loc(u)?;
            }
            for (index, t) in automaton.transitions.iter().enumerate() {
                check_loc(&t.from)?;
                check_loc(&t.to)?;
                let mut refs = Vec::new();
                bexpr_vars(&t.cond, &mut refs);
                for u in &t.updates {
                    refs.push(&u.var);
                    expr_vars(&u.expr, &mut refs);
                }
                for var in refs {
                    if !var_ids.contains(var) {
                        return Err(NetworkError::UnknownVar {
                            automaton: automaton.name.clone(),
                            index,
                            var: var.clone(),
                        });
                    }
                }
                let mut updated = BTreeSet::new();
                for u in &t.updates {
                    if !updated.insert(&u.var) {
                        return Err(NetworkError::DuplicateUpdate {
                            automaton: automaton.name.clone(),
                            index,
                            var: u.var.clone(),
                        });
                    }
                }
                for g in &t.guard {
                    if !clock_ids.contains(&g.clock) {
                        return Err(NetworkError::UnknownClock {
                            automaton: automaton.name.clone(),
                            index,
                            clock: g.clock.clone(),
                        });
                    }
                    if g.bound.is_negative() {
                        return Err(NetworkError::NegativeGuardBound {
                            automaton: automaton.name.clone(),
                            index,
                            bound: g.bound.clone(),
                        });
                    }
                }
                for r in &t.resets {
                    if !clock_ids.contains(r) {
                        return Err(NetworkError::UnknownClock {
                            automaton: automaton.name.clone(),
                            index,
                            clock: r.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The canonical start configuration: every automaton in its initial
    /// location, variables at their declared initial values, clocks at zero.
    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            locations: self.automata.iter().map(|a| a.initial.clone()).collect(),
            vars: self.vars.iter().map(|v| (v.id.clone(), v.init)).collect(),
            clocks: self
                .clocks
                .iter()
                .map(|c| (c.clone(), Rat::zero()))
                .collect(),
        }
    }

    /// The largest constant appearing in any clock guard (zero if none).
    /// Clock values strictly above it are indistinguishable to every guard.
    pub fn max_guard_bound(&self) -> Rat {
        let mut max = Rat::zero();
        for automaton in &self.automata {
            for t in &automaton.transitions {
                for g in &t.guard {
                    if g.bound > max {
                        max = g.bound.clone();
                    }
                }
            }
        }
        max
    }
}

/// A snapshot of a network's execution state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Configuration {
    pub locations: Vec<LocationId>,
    pub vars: BTreeMap<VarId, i64>,
    pub clocks: BTreeMap<ClockId, Rat>,
}
