//! Expression evaluation and the delay/internal step semantics.

use std::collections::BTreeMap;

use crate::rat::Rat;
use crate::ta::{BExpr, ClockConstraint, ClockId, Configuration, Expr, Network, Op, VarId};

/// Failure of a single semantic step. Replay treats any of these as a
/// divergence; the explorer treats them as "transition not enabled".
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("unbound variable `{0}`")]
    UnboundVar(VarId),
    #[error("division by zero while evaluating an expression")]
    DivisionByZero,
    #[error("update of `{var}` produced non-integer value {value}")]
    NonIntegerUpdate { var: VarId, value: Rat },
    #[error("update of `{var}` produced {value}, outside its bounds [{lo}, {hi}]")]
    OutOfBounds {
        var: VarId,
        value: Rat,
        lo: i64,
        hi: i64,
    },
    #[error("update of undeclared variable `{0}`")]
    UndeclaredVar(VarId),
    #[error("unbound clock `{0}`")]
    UnboundClock(ClockId),
    #[error("negative delay {0}")]
    NegativeDelay(Rat),
    #[error("delay blocked: automaton {automaton} is in urgent location `{location}`")]
    UrgentLocationBlocksDelay { automaton: usize, location: String },
    #[error("automaton index {0} out of range")]
    AutomatonIndexOutOfRange(usize),
    #[error("transition index {index} out of range for automaton {automaton}")]
    TransitionIndexOutOfRange { automaton: usize, index: usize },
    #[error("automaton {automaton} is at `{at}`, transition needs `{expected}`")]
    LocationMismatch {
        automaton: usize,
        at: String,
        expected: String,
    },
    #[error("condition false on automaton {automaton} transition {transition}: {cond}")]
    ConditionFalse {
        automaton: usize,
        transition: usize,
        cond: String,
    },
    #[error("guard false on automaton {automaton} transition {transition}: {constraint} (clock at {value})")]
    GuardFalse {
        automaton: usize,
        transition: usize,
        constraint: ClockConstraint,
        value: Rat,
    },
    #[error("configuration has {got} locations, network has {expected} automata")]
    LocationCountMismatch { got: usize, expected: usize },
}

/// Evaluates an integer-variable expression to an exact rational.
pub fn eval_expr(vars: &BTreeMap<VarId, i64>, expr: &Expr) -> Result<Rat, StepError> {
    match expr {
        Expr::Var { id } => vars
            .get(id)
            .map(|n| Rat::from_int(*n))
            .ok_or_else(|| StepError::UnboundVar(id.clone())),
        Expr::Const { value } => Ok(value.clone()),
        Expr::Binop { op, left, right } => {
            let l = eval_expr(vars, left)?;
            let r = eval_expr(vars, right)?;
            Ok(match op {
                Op::Add => l + r,
                Op::Sub => l - r,
                Op::Mul => l * r,
                Op::Div => {
                    if r.is_zero() {
                        return Err(StepError::DivisionByZero);
                    }
                    l / r
                }
            })
        }
    }
}

/// Evaluates a Boolean condition over the variable assignment.
pub fn eval_bool(vars: &BTreeMap<VarId, i64>, bexpr: &BExpr) -> Result<bool, StepError> {
    match bexpr {
        BExpr::True => Ok(true),
        BExpr::False => Ok(false),
        BExpr::Cmp { rel, left, right } => {
            let l = eval_expr(vars, left)?;
            let r = eval_expr(vars, right)?;
            Ok(rel.holds(&l, &r))
        }
        BExpr::And { left, right } => Ok(eval_bool(vars, left)? && eval_bool(vars, right)?),
    }
}

/// Whether every constraint of a guard holds under the clock valuation.
pub fn guard_satisfied(
    clocks: &BTreeMap<ClockId, Rat>,
    guard: &[ClockConstraint],
) -> Result<bool, StepError> {
    for g in guard {
        let value = clocks
            .get(&g.clock)
            .ok_or_else(|| StepError::UnboundClock(g.clock.clone()))?;
        if !g.rel.holds(value, &g.bound) {
            return Ok(false);
        }
    }
    Ok(true)
}

impl Network {
    /// Lets `delta` time pass: every clock advances by the same amount.
    ///
    /// A strictly positive delay is blocked while any automaton occupies an
    /// urgent location; `delta = 0` is always permitted.
    pub fn delay(&self, q: &Configuration, delta: &Rat) -> Result<Configuration, StepError> {
        if delta.is_negative() {
            return Err(StepError::NegativeDelay(delta.clone()));
        }
        if q.locations.len() != self.automata.len() {
            return Err(StepError::LocationCountMismatch {
                got: q.locations.len(),
                expected: self.automata.len(),
            });
        }
        if !delta.is_zero() {
            for (i, automaton) in self.automata.iter().enumerate() {
                if automaton.urgent.contains(&q.locations[i]) {
                    return Err(StepError::UrgentLocationBlocksDelay {
                        automaton: i,
                        location: q.locations[i].clone(),
                    });
                }
            }
        }
        let mut next = q.clone();
        for value in next.clocks.values_mut() {
            *value = &*value + delta;
        }
        Ok(next)
    }

    /// Fires transition `transition` of automaton `automaton`.
    ///
    /// Checks the source location, the condition, and the guard; on success
    /// applies all updates simultaneously against the old assignment (each
    /// result must be an integer within the variable's declared bounds),
    /// resets the listed clocks to zero, and moves only that automaton's
    /// location.
    pub fn internal(
        &self,
        q: &Configuration,
        automaton: usize,
        transition: usize,
    ) -> Result<Configuration, StepError> {
        if q.locations.len() != self.automata.len() {
            return Err(StepError::LocationCountMismatch {
                got: q.locations.len(),
                expected: self.automata.len(),
            });
        }
        let aut = self
            .automata
            .get(automaton)
            .ok_or(StepError::AutomatonIndexOutOfRange(automaton))?;
        let t = aut
            .transitions
            .get(transition)
            .ok_or(StepError::TransitionIndexOutOfRange {
                automaton,
                index: transition,
            })?;

        if q.locations[automaton] != t.from {
            return Err(StepError::LocationMismatch {
                automaton,
                at: q.locations[automaton].clone(),
                expected: t.from.clone(),
            });
        }
        if !eval_bool(&q.vars, &t.cond)? {
            return Err(StepError::ConditionFalse {
                automaton,
                transition,
                cond: t.cond.to_string(),
            });
        }
        for g in &t.guard {
            let value = q
                .clocks
                .get(&g.clock)
                .ok_or_else(|| StepError::UnboundClock(g.clock.clone()))?;
            if !g.rel.holds(value, &g.bound) {
                return Err(StepError::GuardFalse {
                    automaton,
                    transition,
                    constraint: g.clone(),
                    value: value.clone(),
                });
            }
        }

        let mut next = q.clone();
        for update in &t.updates {
            let value = eval_expr(&q.vars, &update.expr)?;
            let n = value.to_i64().ok_or_else(|| StepError::NonIntegerUpdate {
                var: update.var.clone(),
                value: value.clone(),
            })?;
            let decl = self
                .vars
                .iter()
                .find(|v| v.id == update.var)
                .ok_or_else(|| StepError::UndeclaredVar(update.var.clone()))?;
            if n < decl.lo || n > decl.hi {
                return Err(StepError::OutOfBounds {
                    var: update.var.clone(),
                    value,
                    lo: decl.lo,
                    hi: decl.hi,
                });
            }
            next.vars.insert(update.var.clone(), n);
        }
        for clock in &t.resets {
            let slot = next
                .clocks
                .get_mut(clock)
                .ok_or_else(|| StepError::UnboundClock(clock.clone()))?;
            *slot = Rat::zero();
        }
        next.locations[automaton] = t.to.clone();
        Ok(next)
    }
}
