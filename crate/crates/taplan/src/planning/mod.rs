//! Grounded temporal-planning model and plan-validity semantics.
//!
//! A [`PlanningProblem`] is a finite set of propositions, a set of durative
//! actions over them, an initial state, and a goal. A [`Plan`] schedules
//! action instances at rational start times with rational durations. This
//! module implements the full validity judgment for such plans:
//!
//! * each action contributes a *start* and an *end* snap action, placed on
//!   the timeline as [`TimedSnap`]s,
//! * the world state evolves only at happening time points, by removing
//!   deleted propositions and then adding added ones,
//! * preconditions are checked against the state before the effects at the
//!   same instant apply, invariants over the half-open execution interval
//!   `(start, start+duration]`,
//! * mutually exclusive snap actions must be separated by strictly positive
//!   time, and by at least `epsilon` when a separation margin is requested.
//!
//! All operations are pure functions of immutable values, so everything here
//! is safe to share across threads.

mod plan_text;
mod validate;

pub use plan_text::{parse_plan, render_plan, PlanTextError};
pub use validate::{validate_plan, StepResolutionError, Verdict, Violation};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rat::Rat;

/// A ground proposition, identified by an opaque token such as `open(d)`.
pub type Prop = String;

/// An ordered set of propositions.
pub type PropSet = BTreeSet<Prop>;

/// Builds a [`PropSet`] from string-likes; convenience for tests and examples.
pub fn prop_set<I, S>(props: I) -> PropSet
where
    I: IntoIterator<Item = S>,
    S: Into<Prop>,
{
    props.into_iter().map(Into::into).collect()
}

/// An instantaneous state change: preconditions checked against the state in
/// which it executes, then deletes applied, then adds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapAction {
    #[serde(rename = "pre", default)]
    pub pres: PropSet,
    #[serde(rename = "add", default)]
    pub adds: PropSet,
    #[serde(rename = "del", default)]
    pub dels: PropSet,
}

impl SnapAction {
    pub fn new<P, A, D>(pres: P, adds: A, dels: D) -> Self
    where
        P: IntoIterator<Item = &'static str>,
        A: IntoIterator<Item = &'static str>,
        D: IntoIterator<Item = &'static str>,
    {
        SnapAction {
            pres: prop_set(pres),
            adds: prop_set(adds),
            dels: prop_set(dels),
        }
    }
}

/// One end of a duration constraint; `strict` selects `<` over `<=`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationBound {
    pub value: Rat,
    #[serde(default)]
    pub strict: bool,
}

impl DurationBound {
    pub fn at_least(value: Rat) -> Self {
        DurationBound {
            value,
            strict: false,
        }
    }
}

/// A durative action: start and end snap actions, invariants that must hold
/// over the open-start execution interval, and rational duration bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurativeAction {
    pub name: String,
    pub start: SnapAction,
    #[serde(default)]
    pub over_all: PropSet,
    pub end: SnapAction,
    pub lower: DurationBound,
    pub upper: DurationBound,
}

impl DurativeAction {
    /// Whether `d` satisfies both duration bounds (`lower <= d <= upper`,
    /// with `<` where a bound is strict).
    pub fn duration_ok(&self, d: &Rat) -> bool {
        let lower_ok = if self.lower.strict {
            self.lower.value < *d
        } else {
            self.lower.value <= *d
        };
        let upper_ok = if self.upper.strict {
            *d < self.upper.value
        } else {
            *d <= self.upper.value
        };
        lower_ok && upper_ok
    }

    /// The snap action for the given end of the interval.
    pub fn snap(&self, kind: SnapKind) -> &SnapAction {
        match kind {
            SnapKind::Start => &self.start,
            SnapKind::End => &self.end,
        }
    }
}

/// A grounded temporal planning problem.
///
/// `props` and `actions` keep their declaration order; downstream encodings
/// depend on it for determinism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanningProblem {
    pub props: Vec<Prop>,
    pub actions: Vec<DurativeAction>,
    pub init: PropSet,
    pub goal: PropSet,
}

/// A reference to a problem action, by position in `problem.actions`.
pub type ActionIdx = usize;

/// Consistency failure detected when loading or constructing a problem.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error("empty proposition id")]
    EmptyPropId,
    #[error("duplicate proposition `{0}`")]
    DuplicateProp(Prop),
    #[error("empty action name")]
    EmptyActionName,
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("action `{action}` references unknown proposition `{prop}` in {role}")]
    UnknownProp {
        action: String,
        role: &'static str,
        prop: Prop,
    },
    #[error("`{set}` references unknown proposition `{prop}`")]
    UnknownStateProp { set: &'static str, prop: Prop },
    #[error("action `{action}` has a negative {bound} duration bound")]
    NegativeBound { action: String, bound: &'static str },
    #[error("action `{action}` has lower duration bound above its upper bound")]
    InvertedBounds { action: String },
}

impl PlanningProblem {
    /// Checks the structural invariants: unique non-empty ids, every
    /// referenced proposition declared, sane duration bounds.
    pub fn check(&self) -> Result<(), ProblemError> {
        let mut seen = BTreeSet::new();
        for p in &self.props {
            if p.is_empty() {
                return Err(ProblemError::EmptyPropId);
            }
            if !seen.insert(p) {
                return Err(ProblemError::DuplicateProp(p.clone()));
            }
        }
        let declared: BTreeSet<&Prop> = self.props.iter().collect();
        let mut names = BTreeSet::new();
        for action in &self.actions {
            if action.name.is_empty() {
                return Err(ProblemError::EmptyActionName);
            }
            if !names.insert(&action.name) {
                return Err(ProblemError::DuplicateAction(action.name.clone()));
            }
            let roles: [(&'static str, &PropSet); 7] = [
                ("start preconditions", &action.start.pres),
                ("start adds", &action.start.adds),
                ("start deletes", &action.start.dels),
                ("over_all invariants", &action.over_all),
                ("end preconditions", &action.end.pres),
                ("end adds", &action.end.adds),
                ("end deletes", &action.end.dels),
            ];
            for (role, set) in roles {
                if let Some(p) = set.iter().find(|p| !declared.contains(p)) {
                    return Err(ProblemError::UnknownProp {
                        action: action.name.clone(),
                        role,
                        prop: p.clone(),
                    });
                }
            }
            for (bound, b) in [("lower", &action.lower), ("upper", &action.upper)] {
                if b.value.is_negative() {
                    return Err(ProblemError::NegativeBound {
                        action: action.name.clone(),
                        bound,
                    });
                }
            }
            if action.lower.value > action.upper.value {
                return Err(ProblemError::InvertedBounds {
                    action: action.name.clone(),
                });
            }
        }
        for (set, props) in [("init", &self.init), ("goal", &self.goal)] {
            if let Some(p) = props.iter().find(|p| !declared.contains(p)) {
                return Err(ProblemError::UnknownStateProp {
                    set,
                    prop: p.clone(),
                });
            }
        }
        Ok(())
    }

    /// Looks an action up by name.
    pub fn action_index(&self, name: &str) -> Option<ActionIdx> {
        self.actions.iter().position(|a| a.name == name)
    }

    /// The snap action of action `idx` for the given interval end.
    pub fn snap(&self, idx: ActionIdx, kind: SnapKind) -> &SnapAction {
        self.actions[idx].snap(kind)
    }
}

/// Which end of an action's execution interval a snap action belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapKind {
    Start,
    End,
}

impl fmt::Display for SnapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapKind::Start => write!(f, "start"),
            SnapKind::End => write!(f, "end"),
        }
    }
}

/// One scheduled action instance of a plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub action: ActionIdx,
    pub start: Rat,
    pub duration: Rat,
}

impl PlanStep {
    pub fn new(action: ActionIdx, start: Rat, duration: Rat) -> Self {
        PlanStep {
            action,
            start,
            duration,
        }
    }

    /// End of the execution interval, `start + duration`.
    pub fn end(&self) -> Rat {
        &self.start + &self.duration
    }
}

/// A temporal plan: a list of scheduled action instances.
///
/// Plans are data, not judgments; whether a plan is valid for a problem is
/// decided by [`validate_plan`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn new(steps: Vec<PlanStep>) -> Self {
        Plan { steps }
    }

    pub fn empty() -> Self {
        Plan { steps: Vec::new() }
    }
}

/// A snap action placed on the timeline. Identity is the full triple
/// `(time, action, kind)`: structurally identical snap actions of different
/// problem actions stay distinct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimedSnap {
    pub time: Rat,
    pub action: ActionIdx,
    pub kind: SnapKind,
}

/// True iff the two snap actions interfere: one's preconditions meet the
/// other's effects, or their add and delete effects meet. Symmetric.
pub fn mutex(a: &SnapAction, b: &SnapAction) -> bool {
    fn intersects(x: &PropSet, y: &PropSet) -> bool {
        let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
        small.iter().any(|p| large.contains(p))
    }
    fn one_way(a: &SnapAction, b: &SnapAction) -> bool {
        intersects(&a.pres, &b.adds) || intersects(&a.pres, &b.dels) || intersects(&a.adds, &b.dels)
    }
    one_way(a, b) || one_way(b, a)
}

/// The set of timed snap actions a plan places on the timeline: a start snap
/// at each step's start time and an end snap at `start + duration`.
pub fn timed_snaps(plan: &Plan) -> BTreeSet<TimedSnap> {
    let mut out = BTreeSet::new();
    for step in &plan.steps {
        out.insert(TimedSnap {
            time: step.start.clone(),
            action: step.action,
            kind: SnapKind::Start,
        });
        out.insert(TimedSnap {
            time: step.end(),
            action: step.action,
            kind: SnapKind::End,
        });
    }
    out
}

/// The happening time points of a plan: every instant where some snap action
/// executes, strictly increasing and duplicate-free.
pub fn happening_times(plan: &Plan) -> Vec<Rat> {
    let times: BTreeSet<Rat> = plan
        .steps
        .iter()
        .flat_map(|s| [s.start.clone(), s.end()])
        .collect();
    times.into_iter().collect()
}

/// The combined (adds, dels) of every snap action scheduled at exactly `t`.
pub fn effects_at(problem: &PlanningProblem, plan: &Plan, t: &Rat) -> (PropSet, PropSet) {
    let mut adds = PropSet::new();
    let mut dels = PropSet::new();
    for snap in timed_snaps(plan) {
        if snap.time == *t {
            let h = problem.snap(snap.action, snap.kind);
            adds.extend(h.adds.iter().cloned());
            dels.extend(h.dels.iter().cloned());
        }
    }
    (adds, dels)
}

/// The invariants active at `t`: the union of `over_all(a)` over steps whose
/// execution interval satisfies `start < t <= start + duration`. The start
/// instant is excluded, so instantaneous steps never contribute.
pub fn invariants_at(problem: &PlanningProblem, plan: &Plan, t: &Rat) -> PropSet {
    let mut out = PropSet::new();
    for step in &plan.steps {
        if step.start < *t && *t <= step.end() {
            out.extend(problem.actions[step.action].over_all.iter().cloned());
        }
    }
    out
}

/// The state sequence induced by a plan: `M_0` is the initial state, and each
/// happening time point `t_i` produces `M_{i+1} = (M_i - dels(t_i)) + adds(t_i)`.
///
/// The sequence is defined for every plan; validity of the transitions is
/// judged separately by [`validate_plan`].
pub fn state_sequence(problem: &PlanningProblem, plan: &Plan) -> Vec<PropSet> {
    let mut states = Vec::with_capacity(plan.steps.len() * 2 + 1);
    states.push(problem.init.clone());
    for t in happening_times(plan) {
        let (adds, dels) = effects_at(problem, plan, &t);
        let mut next: PropSet = states.last().unwrap().difference(&dels).cloned().collect();
        next.extend(adds);
        states.push(next);
    }
    states
}

/// True iff every pair of distinct mutually exclusive timed snap actions is
/// separated by strictly positive time, and by at least `epsilon`.
///
/// Distinctness is by `(time, action, kind)`; the same action's own start and
/// end, and repeated executions of the same snap action, are all checked when
/// their snap actions interfere.
pub fn separation_ok(problem: &PlanningProblem, plan: &Plan, epsilon: &Rat) -> bool {
    let snaps: Vec<TimedSnap> = timed_snaps(plan).into_iter().collect();
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
                return false;
            }
        }
    }
    true
}

/// True iff no two distinct steps of the same action have overlapping closed
/// execution intervals. Intervals that merely touch (one ends exactly when
/// the other starts) count as overlapping.
pub fn no_self_overlap(plan: &Plan) -> bool {
    for (i, a) in plan.steps.iter().enumerate() {
        for b in &plan.steps[i + 1..] {
            if a.action != b.action {
                continue;
            }
            let overlap = a.start <= b.end() && b.start <= a.end();
            if overlap {
                return false;
            }
        }
    }
    true
}
