//! Constructive mapping from valid plans to accepting runs.
//!
//! Given a plan that the validator accepts (and that never overlaps two
//! executions of the same action), [`build_witness`] produces a run of the
//! encoded network that ends in the goal location. The shape is fixed:
//!
//! ```text
//! e1M; delay δ0; [delay (t_i − t_{i−1}); happening segment i]…; e2M
//! ```
//!
//! where `δ0 = max(1, ε)` is a warm-up delay that satisfies every
//! separation guard for snap actions that have never fired, and each
//! happening segment replays one time point of the plan as internal steps
//! in a fixed phase order:
//!
//! 1. `ee` for every action ending here,
//! 2. `se`, `ie`, `ee'` consecutively for every instantaneous action,
//! 3. `ee'` for every ending action,
//! 4. `se` for every starting action,
//! 5. `se'` for every starting action,
//!
//! each phase processing actions in problem declaration order. Ending
//! actions must unlock their invariants (phase 1) before any effect that
//! deletes a formerly protected proposition fires (phases 2 and 3), and
//! starting actions lock their invariants (phase 5) only after every
//! effect of the time point has landed.
//!
//! The module also exposes the state-encoding predicates used to check,
//! after every segment, that the configuration really encodes the plan
//! state: automaton locations track which actions are running, each snap
//! action's clock shows the time since it last fired, `vp`/`lp`/`aa`
//! mirror the induced state, the invariant lock counts, and the number of
//! running actions. A run built here is self-contained: replaying it
//! through the network semantics reproduces every recorded configuration.

use std::fmt::Write as _;

use crate::encode::{labels, EncodeOptions, EncodedNetwork};
use crate::planning::{
    happening_times, state_sequence, validate_plan, Plan, PlanningProblem, SnapKind,
    StepResolutionError,
};
use crate::rat::Rat;
use crate::ta::{Configuration, Run, RunStep, StepError};

/// Which side of a happening point a query refers to.
///
/// `Before` compares occurrence times strictly (`<`), so events at the
/// point itself do not count yet; `After` compares inclusively (`<=`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeSide {
    Before,
    After,
}

impl TimeSide {
    fn admits(&self, occurrence: &Rat, t: &Rat) -> bool {
        match self {
            TimeSide::Before => occurrence < t,
            TimeSide::After => occurrence <= t,
        }
    }
}

/// The plan steps scheduled at one happening point, split by role. Step
/// indices within each role are ordered by action declaration order.
///
/// Under the no-self-overlap precondition the three lists are pairwise
/// disjoint and no action appears twice.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ScheduleAt {
    /// Steps with positive duration whose interval ends here.
    pub ending: Vec<usize>,
    /// Steps with zero duration scheduled here.
    pub instantaneous: Vec<usize>,
    /// Steps with positive duration whose interval starts here.
    pub starting: Vec<usize>,
}

/// Failure to build a witness run.
#[derive(Debug, thiserror::Error)]
pub enum WitnessError {
    #[error(transparent)]
    Resolution(#[from] StepResolutionError),
    #[error("plan is not valid ({count} violation(s)); first: {first}")]
    InvalidPlan { first: String, count: usize },
    #[error("plan overlaps two executions of `{action}`")]
    SelfOverlap { action: String },
    #[error("epsilon {requested} does not match the network's encoding epsilon {encoded}")]
    EpsilonMismatch { requested: Rat, encoded: Rat },
    #[error("the network does not encode this problem: {0}")]
    ProblemMismatch(String),
    #[error("t={time} is not a happening point of the plan")]
    NotAHappening { time: Rat },
    #[error("automaton `{automaton}` has no `{label}` transition")]
    MissingTransition { automaton: String, label: String },
    #[error("at plan t={time}, `{label}` of `{automaton}` cannot fire: {source}")]
    StepFailed {
        time: Rat,
        automaton: String,
        label: String,
        source: StepError,
    },
    #[error("delay of {delta} toward plan t={time} is blocked: {source}")]
    DelayBlocked {
        time: Rat,
        delta: Rat,
        source: StepError,
    },
    #[error("{side} the happening at t={time}, the configuration does not encode the plan state: {clause}")]
    EncodingMismatch {
        side: &'static str,
        time: Rat,
        clause: String,
    },
}

/// The warm-up delay and never-fired clock marker, `max(1, ε)`. It is
/// positive and satisfies every separation guard, so snap actions that have
/// never fired never block a transition.
pub fn delta0(options: &EncodeOptions) -> Rat {
    Rat::one().max(options.epsilon.clone())
}

/// Splits the plan steps scheduled at `t` by role. Errors when `t` is not a
/// happening point (no step starts or ends there).
pub fn classify_at(plan: &Plan, t: &Rat) -> Result<ScheduleAt, WitnessError> {
    let mut sched = ScheduleAt::default();
    for (j, step) in plan.steps.iter().enumerate() {
        if step.duration.is_zero() {
            if step.start == *t {
                sched.instantaneous.push(j);
            }
        } else {
            if step.end() == *t {
                sched.ending.push(j);
            }
            if step.start == *t {
                sched.starting.push(j);
            }
        }
    }
    if sched.ending.is_empty() && sched.instantaneous.is_empty() && sched.starting.is_empty() {
        return Err(WitnessError::NotAHappening { time: t.clone() });
    }
    let by_action = |steps: &mut Vec<usize>| {
        steps.sort_by_key(|&j| (plan.steps[j].action, j));
    };
    by_action(&mut sched.ending);
    by_action(&mut sched.instantaneous);
    by_action(&mut sched.starting);
    Ok(sched)
}

/// True iff some execution of action `action` is running at `t` on the given
/// side: it has started (`< t` or `<= t`) but not yet ended under the same
/// comparison.
pub fn running_at(plan: &Plan, action: usize, t: &Rat, side: TimeSide) -> bool {
    plan.steps
        .iter()
        .filter(|s| s.action == action)
        .any(|s| side.admits(&s.start, t) && !side.admits(&s.end(), t))
}

/// Time since the last occurrence of the given snap action at `t` on the
/// given side. When the snap has never fired, returns the marker `t + d_arb`
/// which matches the clock value produced by the warm-up delay.
pub fn time_since_at(
    plan: &Plan,
    action: usize,
    kind: SnapKind,
    t: &Rat,
    side: TimeSide,
    d_arb: &Rat,
) -> Rat {
    let last = plan
        .steps
        .iter()
        .filter(|s| s.action == action)
        .map(|s| match kind {
            SnapKind::Start => s.start.clone(),
            SnapKind::End => s.end(),
        })
        .filter(|o| side.admits(o, t))
        .max();
    match last {
        Some(o) => t - &o,
        None => t + d_arb,
    }
}

/// A happening point's view of the plan: which actions are running and how
/// long ago each snap action last fired, on either side of the point.
pub struct EncState<'p> {
    plan: &'p Plan,
    pub i: usize,
    pub t: Rat,
    d_arb: Rat,
}

impl<'p> EncState<'p> {
    /// View of happening point `i`. Panics if the plan has fewer happening
    /// points.
    pub fn new(plan: &'p Plan, i: usize, d_arb: Rat) -> Self {
        let t = happening_times(plan)[i].clone();
        EncState { plan, i, t, d_arb }
    }

    pub fn running_before(&self, action: usize) -> bool {
        running_at(self.plan, action, &self.t, TimeSide::Before)
    }

    pub fn running_after(&self, action: usize) -> bool {
        running_at(self.plan, action, &self.t, TimeSide::After)
    }

    pub fn time_since_before(&self, action: usize, kind: SnapKind) -> Rat {
        time_since_at(
            self.plan,
            action,
            kind,
            &self.t,
            TimeSide::Before,
            &self.d_arb,
        )
    }

    pub fn time_since_after(&self, action: usize, kind: SnapKind) -> Rat {
        time_since_at(
            self.plan,
            action,
            kind,
            &self.t,
            TimeSide::After,
            &self.d_arb,
        )
    }
}

/// Describes the first way in which `q` fails to encode the plan state on
/// the given side of happening point `i`; `None` when it encodes it.
///
/// For a plan with no happening points the special form applies (at `i = 0`):
/// every action automaton inactive, every clock positive, `vp` matching the
/// initial state, every lock and the running counter zero.
pub fn encoding_mismatch(
    enc: &EncodedNetwork,
    problem: &PlanningProblem,
    plan: &Plan,
    i: usize,
    q: &Configuration,
    side: TimeSide,
) -> Option<String> {
    let d_arb = delta0(&enc.options);
    let times = happening_times(plan);

    if times.is_empty() {
        for (k, name) in enc.action_order.iter().enumerate() {
            if q.locations[k + 1] != format!("{name}.inactive") {
                return Some(format!("automaton `{name}` is not inactive"));
            }
        }
        for (clock, value) in &q.clocks {
            if !(value > &Rat::zero()) {
                return Some(format!("clock `{clock}` is {value}, expected positive"));
            }
        }
        for p in &problem.props {
            let expected = i64::from(problem.init.contains(p));
            if q.vars[&enc.vars.vp[p]] != expected {
                return Some(format!("`{p}` is not at its initial value"));
            }
            if q.vars[&enc.vars.lp[p]] != 0 {
                return Some(format!("lock count for `{p}` is nonzero"));
            }
        }
        if q.vars[&enc.vars.aa] != 0 {
            return Some("running-action counter is nonzero".to_string());
        }
        return None;
    }

    let t = &times[i];
    let state_index = match side {
        TimeSide::Before => i,
        TimeSide::After => i + 1,
    };
    let state = &state_sequence(problem, plan)[state_index];

    for (k, name) in enc.action_order.iter().enumerate() {
        let running = running_at(plan, k, t, side);
        let expected = if running {
            format!("{name}.running")
        } else {
            format!("{name}.inactive")
        };
        if q.locations[k + 1] != expected {
            return Some(format!(
                "automaton `{name}` is at `{}`, expected `{expected}`",
                q.locations[k + 1]
            ));
        }
        for kind in [SnapKind::Start, SnapKind::End] {
            let clock = enc.clocks.of(name, kind);
            let expected = time_since_at(plan, k, kind, t, side, &d_arb);
            if q.clocks[clock] != expected {
                return Some(format!(
                    "clock `{clock}` is {}, expected {expected}",
                    q.clocks[clock]
                ));
            }
        }
    }
    for p in &problem.props {
        let expected = i64::from(state.contains(p));
        if q.vars[&enc.vars.vp[p]] != expected {
            return Some(format!(
                "`{p}` is {}, expected {expected}",
                q.vars[&enc.vars.vp[p]]
            ));
        }
        let locks = (0..problem.actions.len())
            .filter(|&k| problem.actions[k].over_all.contains(p) && running_at(plan, k, t, side))
            .count() as i64;
        if q.vars[&enc.vars.lp[p]] != locks {
            return Some(format!(
                "lock count for `{p}` is {}, expected {locks}",
                q.vars[&enc.vars.lp[p]]
            ));
        }
    }
    let running = (0..problem.actions.len())
        .filter(|&k| running_at(plan, k, t, side))
        .count() as i64;
    if q.vars[&enc.vars.aa] != running {
        return Some(format!(
            "running-action counter is {}, expected {running}",
            q.vars[&enc.vars.aa]
        ));
    }
    None
}

/// True iff `q` encodes the plan state just before happening point `i`.
pub fn encodes_before(
    enc: &EncodedNetwork,
    problem: &PlanningProblem,
    plan: &Plan,
    i: usize,
    q: &Configuration,
) -> bool {
    encoding_mismatch(enc, problem, plan, i, q, TimeSide::Before).is_none()
}

/// True iff `q` encodes the plan state just after happening point `i`.
pub fn encodes_after(
    enc: &EncodedNetwork,
    problem: &PlanningProblem,
    plan: &Plan,
    i: usize,
    q: &Configuration,
) -> bool {
    encoding_mismatch(enc, problem, plan, i, q, TimeSide::After).is_none()
}

/// Fires one labelled transition of one action automaton, recording the step.
fn fire(
    enc: &EncodedNetwork,
    q: &mut Configuration,
    steps: &mut Vec<RunStep>,
    automaton: usize,
    label: &str,
    time: &Rat,
) -> Result<(), WitnessError> {
    let name = &enc.network.automata[automaton].name;
    let transition =
        enc.transition_index(automaton, label)
            .ok_or_else(|| WitnessError::MissingTransition {
                automaton: name.clone(),
                label: label.to_string(),
            })?;
    let after = enc
        .network
        .internal(q, automaton, transition)
        .map_err(|source| WitnessError::StepFailed {
            time: time.clone(),
            automaton: name.clone(),
            label: label.to_string(),
            source,
        })?;
    *q = after.clone();
    steps.push(RunStep::Internal {
        automaton,
        transition,
        after,
    });
    Ok(())
}

/// Replays happening point `i` from `q_in` as internal steps in the fixed
/// phase order. `q_in` must encode the plan state before the point; the
/// returned steps end in a configuration encoding the state after it.
pub fn build_happening_segment(
    enc: &EncodedNetwork,
    plan: &Plan,
    i: usize,
    q_in: &Configuration,
) -> Result<Vec<RunStep>, WitnessError> {
    let t = happening_times(plan)[i].clone();
    let sched = classify_at(plan, &t)?;
    let mut q = q_in.clone();
    let mut steps = Vec::new();
    let automaton = |j: &usize| plan.steps[*j].action + 1;

    for j in &sched.ending {
        fire(enc, &mut q, &mut steps, automaton(j), labels::EE, &t)?;
    }
    for j in &sched.instantaneous {
        let a = automaton(j);
        fire(enc, &mut q, &mut steps, a, labels::SE, &t)?;
        fire(enc, &mut q, &mut steps, a, labels::IE, &t)?;
        fire(enc, &mut q, &mut steps, a, labels::EE_PRIME, &t)?;
    }
    for j in &sched.ending {
        fire(enc, &mut q, &mut steps, automaton(j), labels::EE_PRIME, &t)?;
    }
    for j in &sched.starting {
        fire(enc, &mut q, &mut steps, automaton(j), labels::SE, &t)?;
    }
    for j in &sched.starting {
        fire(enc, &mut q, &mut steps, automaton(j), labels::SE_PRIME, &t)?;
    }
    Ok(steps)
}

/// Builds the accepting run witnessing the plan's validity.
///
/// Preconditions, checked up front: the plan validates under `epsilon`, no
/// two executions of the same action overlap, `epsilon` matches the
/// network's encoding options, and the network encodes `problem`. The
/// returned run replays exactly and ends in the goal location; the state
/// encoding is re-checked after every happening segment rather than assumed.
pub fn build_witness(
    enc: &EncodedNetwork,
    problem: &PlanningProblem,
    plan: &Plan,
    epsilon: &Rat,
) -> Result<Run, WitnessError> {
    let verdict = validate_plan(problem, plan, epsilon)?;
    if !verdict.is_valid() {
        return Err(WitnessError::InvalidPlan {
            first: verdict.violations[0].to_string(),
            count: verdict.violations.len(),
        });
    }
    if !verdict.no_self_overlap {
        let action = overlapping_action(problem, plan).unwrap_or_default();
        return Err(WitnessError::SelfOverlap { action });
    }
    if *epsilon != enc.options.epsilon {
        return Err(WitnessError::EpsilonMismatch {
            requested: epsilon.clone(),
            encoded: enc.options.epsilon.clone(),
        });
    }
    let names: Vec<&String> = problem.actions.iter().map(|a| &a.name).collect();
    if enc.action_order.iter().collect::<Vec<_>>() != names {
        return Err(WitnessError::ProblemMismatch(
            "action names or order differ".to_string(),
        ));
    }
    if let Some(p) = problem.props.iter().find(|p| !enc.vars.vp.contains_key(*p)) {
        return Err(WitnessError::ProblemMismatch(format!(
            "proposition `{p}` has no variable"
        )));
    }

    let initial = enc.initial_configuration();
    let mut q = initial.clone();
    let mut steps = Vec::new();
    let d0 = delta0(&enc.options);

    // The initial location is urgent, so e1M fires before any time passes.
    fire(enc, &mut q, &mut steps, 0, labels::E1M, &-d0.clone())?;
    delay(enc, &mut q, &mut steps, d0.clone(), &Rat::zero())?;

    let times = happening_times(plan);
    let mut prev = Rat::zero();
    for (i, t) in times.iter().enumerate() {
        delay(enc, &mut q, &mut steps, t - &prev, t)?;
        if let Some(clause) = encoding_mismatch(enc, problem, plan, i, &q, TimeSide::Before) {
            return Err(WitnessError::EncodingMismatch {
                side: "before",
                time: t.clone(),
                clause,
            });
        }
        let segment = build_happening_segment(enc, plan, i, &q)?;
        if let Some(last) = segment.last() {
            q = last.after().clone();
        }
        steps.extend(segment);
        if let Some(clause) = encoding_mismatch(enc, problem, plan, i, &q, TimeSide::After) {
            return Err(WitnessError::EncodingMismatch {
                side: "after",
                time: t.clone(),
                clause,
            });
        }
        prev = t.clone();
    }

    fire(enc, &mut q, &mut steps, 0, labels::E2M, &prev)?;
    Ok(Run { initial, steps })
}

fn delay(
    enc: &EncodedNetwork,
    q: &mut Configuration,
    steps: &mut Vec<RunStep>,
    delta: Rat,
    toward: &Rat,
) -> Result<(), WitnessError> {
    let after = enc
        .network
        .delay(q, &delta)
        .map_err(|source| WitnessError::DelayBlocked {
            time: toward.clone(),
            delta: delta.clone(),
            source,
        })?;
    *q = after.clone();
    steps.push(RunStep::Delay { delta, after });
    Ok(())
}

/// The name of some action with two overlapping executions, if any.
fn overlapping_action(problem: &PlanningProblem, plan: &Plan) -> Option<String> {
    for (i, a) in plan.steps.iter().enumerate() {
        for b in &plan.steps[i + 1..] {
            if a.action == b.action && a.start <= b.end() && b.start <= a.end() {
                return Some(problem.actions[a.action].name.clone());
            }
        }
    }
    None
}

/// Renders a run as a human-readable timeline, one line per step. Plan
/// times are model times shifted back by the warm-up delay (the first delay
/// step of a witness run).
pub fn timeline(enc: &EncodedNetwork, run: &Run) -> String {
    let mut out = String::new();
    let warm_up = run.steps.iter().find_map(|s| match s {
        RunStep::Delay { delta, .. } => Some(delta.clone()),
        RunStep::Internal { .. } => None,
    });
    let mut model = Rat::zero();
    let mut delays_seen = 0usize;
    for (i, step) in run.steps.iter().enumerate() {
        let _ = write!(out, "{i:>4}. ");
        match step {
            RunStep::Delay { delta, .. } => {
                model = &model + delta;
                delays_seen += 1;
                let _ = write!(out, "delay +{delta}");
            }
            RunStep::Internal {
                automaton,
                transition,
                ..
            } => {
                let a = &enc.network.automata[*automaton];
                let _ = write!(out, "{:<4} {}", a.transitions[*transition].label, a.name);
            }
        }
        match &warm_up {
            Some(d0) if delays_seen >= 1 => {
                let _ = writeln!(out, "  (plan t={})", &model - d0);
            }
            _ => {
                let _ = writeln!(out, "  (model t={model})");
            }
        }
    }
    out
}
