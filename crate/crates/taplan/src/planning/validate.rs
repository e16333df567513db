//! The plan-validity judgment.
//!
//! A plan is valid for a problem and a separation margin `epsilon` when the
//! state sequence it induces satisfies every snap precondition and every
//! active invariant, the goal holds in the final state, every duration is
//! nonnegative and within its action's bounds, and mutually exclusive snap
//! actions are separated in time. The validator reports *all* violations,
//! ordered by clause and then by time, so the first entry is the earliest
//! failure of the lowest-numbered clause.

use std::fmt;

use crate::planning::{
    happening_times, invariants_at, mutex, no_self_overlap, state_sequence, timed_snaps, Plan,
    PlanningProblem, PropSet, SnapKind, TimedSnap,
};
use crate::rat::Rat;

/// A plan step referenced an action index outside the problem.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("plan step {step} references action index {index}, but the problem has {actions} actions")]
pub struct StepResolutionError {
    pub step: usize,
    pub index: usize,
    pub actions: usize,
}

/// One violated validity clause.
///
/// Labels follow the validity definition's clause numbering: 1a/1b are the
/// valid-state-sequence conditions (preconditions, invariants), 3 is goal
/// achievement, 4 the duration bounds, 5 nonnegative durations, 6 the mutex
/// separation condition. Clause 2 (the initial state) and the state update
/// rule inside clause 1 hold by construction and never appear here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A snap action executes at `time` but its preconditions are not all in
    /// the state there.
    UnsatisfiedPrecondition {
        time: Rat,
        action: String,
        kind: SnapKind,
        missing: PropSet,
    },
    /// Invariants active at `time` are not all in the state there.
    BrokenInvariant { time: Rat, missing: PropSet },
    /// Goal propositions missing from the final state.
    GoalNotReached { missing: PropSet },
    /// A step's duration falls outside its action's bounds.
    DurationOutOfBounds {
        step: usize,
        action: String,
        duration: Rat,
    },
    /// A step's duration is negative.
    NegativeDuration {
        step: usize,
        action: String,
        duration: Rat,
    },
    /// Two mutually exclusive snap actions are scheduled too close together.
    InsufficientSeparation {
        first: TimedSnap,
        second: TimedSnap,
        first_action: String,
        second_action: String,
        gap: Rat,
        epsilon: Rat,
    },
}

impl Violation {
    /// The violated clause's label in the validity definition.
    pub fn clause(&self) -> &'static str {
        match self {
            Violation::UnsatisfiedPrecondition { .. } => "1a",
            Violation::BrokenInvariant { .. } => "1b",
            Violation::GoalNotReached { .. } => "3",
            Violation::DurationOutOfBounds { .. } => "4",
            Violation::NegativeDuration { .. } => "5",
            Violation::InsufficientSeparation { .. } => "6",
        }
    }

    fn sort_key(&self) -> (u8, Option<Rat>) {
        match self {
            Violation::UnsatisfiedPrecondition { time, .. } => (0, Some(time.clone())),
            Violation::BrokenInvariant { time, .. } => (1, Some(time.clone())),
            Violation::GoalNotReached { .. } => (2, None),
            Violation::DurationOutOfBounds { step, .. } => (3, Some(Rat::from_int(*step as i64))),
            Violation::NegativeDuration { step, .. } => (4, Some(Rat::from_int(*step as i64))),
            Violation::InsufficientSeparation { first, .. } => (5, Some(first.time.clone())),
        }
    }
}

fn join_props(props: &PropSet) -> String {
    props.iter().cloned().collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {}: ", self.clause())?;
        match self {
            Violation::UnsatisfiedPrecondition {
                time,
                action,
                kind,
                missing,
            } => write!(
                f,
                "at t={time}, {kind} of `{action}` requires missing {{{}}}",
                join_props(missing)
            ),
            Violation::BrokenInvariant { time, missing } => write!(
                f,
                "at t={time}, active invariants {{{}}} do not hold",
                join_props(missing)
            ),
            Violation::GoalNotReached { missing } => write!(
                f,
                "goal propositions {{{}}} missing from the final state",
                join_props(missing)
            ),
            Violation::DurationOutOfBounds {
                step,
                action,
                duration,
            } => write!(
                f,
                "step {step} runs `{action}` for {duration}, outside its duration bounds"
            ),
            Violation::NegativeDuration {
                step,
                action,
                duration,
            } => write!(
                f,
                "step {step} runs `{action}` for negative duration {duration}"
            ),
            Violation::InsufficientSeparation {
                first,
                second,
                first_action,
                second_action,
                gap,
                epsilon,
            } => {
                write!(
                    f,
                    "mutex separation: {} of `{first_action}` at t={} and {} of `{second_action}` \
                     at t={} are {gap} apart (need > 0",
                    first.kind, first.time, second.kind, second.time
                )?;
                if !epsilon.is_zero() {
                    write!(f, " and >= {epsilon}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The validator's result: the list of violated clauses (empty means valid)
/// plus the self-overlap status, which is not a validity clause but is a
/// precondition for witness construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
    pub no_self_overlap: bool,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every validity clause of `plan` against `problem` under the
/// separation margin `epsilon`, collecting all violations.
pub fn validate_plan(
    problem: &PlanningProblem,
    plan: &Plan,
    epsilon: &Rat,
) -> Result<Verdict, StepResolutionError> {
    for (i, step) in plan.steps.iter().enumerate() {
        if step.action >= problem.actions.len() {
            return Err(StepResolutionError {
                step: i,
                index: step.action,
                actions: problem.actions.len(),
            });
        }
    }

    let mut violations = Vec::new();
    let times = happening_times(plan);
    let states = state_sequence(problem, plan);
    let snaps: Vec<TimedSnap> = timed_snaps(plan).into_iter().collect();

    // 1a: preconditions against the state before the instant's effects.
    for snap in &snaps {
        let i = times.iter().position(|t| *t == snap.time).unwrap();
        let state = &states[i];
        let h = problem.snap(snap.action, snap.kind);
        let missing: PropSet = h.pres.difference(state).cloned().collect();
        if !missing.is_empty() {
            violations.push(Violation::UnsatisfiedPrecondition {
                time: snap.time.clone(),
                action: problem.actions[snap.action].name.clone(),
                kind: snap.kind,
                missing,
            });
        }
    }

    // 1b: invariants of running actions against the same state.
    for (i, t) in times.iter().enumerate() {
        let missing: PropSet = invariants_at(problem, plan, t)
            .difference(&states[i])
            .cloned()
            .collect();
        if !missing.is_empty() {
            violations.push(Violation::BrokenInvariant {
                time: t.clone(),
                missing,
            });
        }
    }

    // 3: goal in the final state.
    let missing_goal: PropSet = problem
        .goal
        .difference(states.last().unwrap())
        .cloned()
        .collect();
    if !missing_goal.is_empty() {
        violations.push(Violation::GoalNotReached {
            missing: missing_goal,
        });
    }

    // 4 and 5: per-step duration checks.
    for (i, step) in plan.steps.iter().enumerate() {
        let action = &problem.actions[step.action];
        if !action.duration_ok(&step.duration) {
            violations.push(Violation::DurationOutOfBounds {
                step: i,
                action: action.name.clone(),
                duration: step.duration.clone(),
            });
        }
        if step.duration.is_negative() {
            violations.push(Violation::NegativeDuration {
                step: i,
                action: action.name.clone(),
                duration: step.duration.clone(),
            });
        }
    }

    // 6: pairwise separation of mutex snaps.
    for (i, a) in snaps.iter().enumerate() {
        for b in &snaps[i + 1..] {
            if !mutex(
                problem.snap(a.action, a.kind),
                problem.snap(b.action, b.kind),
            ) {
                continue;
            }
            let gap = (&b.time - &a.time).abs();
            if gap.is_zero() || gap < *epsilon {
                let (first, second) = if a.time <= b.time { (a, b) } else { (b, a) };
                violations.push(Violation::InsufficientSeparation {
                    first: first.clone(),
                    second: second.clone(),
                    first_action: problem.actions[first.action].name.clone(),
                    second_action: problem.actions[second.action].name.clone(),
                    gap: gap.clone(),
                    epsilon: epsilon.clone(),
                });
            }
        }
    }

    violations.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(Verdict {
        violations,
        no_self_overlap: no_self_overlap(plan),
    })
}
