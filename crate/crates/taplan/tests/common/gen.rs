//! Seeded random generation of small planning problems and plans.
//!
//! Two plan generators are provided: [`valid_plan`] builds schedules that are
//! valid by construction (sequential occurrences with wide gaps, plus an
//! optional concurrent occurrence of an action whose propositions are
//! disjoint from everything else), and [`random_plan`] samples unconstrained
//! schedules that are usually invalid. Callers that need validity still
//! filter through the validator; construction only keeps the hit rate high.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use taplan::planning::{
    mutex, DurationBound, DurativeAction, Plan, PlanStep, PlanningProblem, Prop, PropSet,
    SnapAction,
};
use taplan::rat::Rat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational with denominator at most 4, between `lo` and `hi` quarters.
fn quarters(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rat {
    Rat::new(rng.gen_range(lo..=hi), 4)
}

fn subset(rng: &mut ChaCha8Rng, props: &[Prop], keep: f64) -> PropSet {
    props
        .iter()
        .filter(|_| rng.gen_bool(keep))
        .cloned()
        .collect()
}

fn snap(rng: &mut ChaCha8Rng, props: &[Prop]) -> SnapAction {
    SnapAction {
        pres: subset(rng, props, 0.35),
        adds: subset(rng, props, 0.35),
        dels: subset(rng, props, 0.25),
    }
}

/// A random problem with at most 5 propositions, at most 4 actions, and
/// duration bounds whose denominators divide 4.
pub fn problem(rng: &mut ChaCha8Rng) -> PlanningProblem {
    let props: Vec<Prop> = (0..rng.gen_range(1..=5)).map(|i| format!("p{i}")).collect();
    let actions = (0..rng.gen_range(1..=4))
        .map(|i| {
            let mut lower = quarters(rng, 0, 12);
            let mut upper = quarters(rng, 0, 16);
            if upper < lower {
                std::mem::swap(&mut lower, &mut upper);
            }
            let tight = lower == upper;
            DurativeAction {
                name: format!("a{i}"),
                start: snap(rng, &props),
                over_all: subset(rng, &props, 0.25),
                end: snap(rng, &props),
                lower: DurationBound {
                    value: lower,
                    strict: !tight && rng.gen_bool(0.2),
                },
                upper: DurationBound {
                    value: upper,
                    strict: !tight && rng.gen_bool(0.2),
                },
            }
        })
        .collect();
    let init = subset(rng, &props, 0.5);
    let goal = subset(rng, &props, 0.3);
    PlanningProblem {
        props,
        actions,
        init,
        goal,
    }
}

fn apply(state: &PropSet, h: &SnapAction) -> PropSet {
    let mut next: PropSet = state.difference(&h.dels).cloned().collect();
    next.extend(h.adds.iter().cloned());
    next
}

/// A duration within the action's bounds with denominator dividing 4, at
/// least `min` (used to keep an action's own start and end snaps separated
/// when they are mutex). None when the bounds admit no such value.
fn pick_duration(rng: &mut ChaCha8Rng, action: &DurativeAction, min: &Rat) -> Option<Rat> {
    let candidates: Vec<Rat> = (0..=24)
        .map(|k| Rat::new(k, 4))
        .filter(|d| action.duration_ok(d) && d >= min)
        .collect();
    candidates.choose(rng).cloned()
}

/// Smallest allowed duration for an occurrence: when the action's own start
/// and end snaps are mutex, they must sit strictly apart and at least
/// `epsilon` apart; otherwise zero is fine.
fn min_duration(action: &DurativeAction, epsilon: &Rat) -> Rat {
    if !mutex(&action.start, &action.end) {
        Rat::zero()
    } else if epsilon.is_zero() {
        Rat::new(1, 4)
    } else {
        epsilon.clone()
    }
}

/// Every proposition an action reads or writes at any point.
fn footprint(action: &DurativeAction) -> PropSet {
    let mut out = PropSet::new();
    for h in [&action.start, &action.end] {
        out.extend(h.pres.iter().cloned());
        out.extend(h.adds.iter().cloned());
        out.extend(h.dels.iter().cloned());
    }
    out.extend(action.over_all.iter().cloned());
    out
}

/// The state a plan ends in: fold effects over happenings in time order,
/// deletes before adds at each instant.
pub fn final_state(problem: &PlanningProblem, plan: &Plan) -> PropSet {
    let mut times: BTreeSet<Rat> = BTreeSet::new();
    for step in &plan.steps {
        times.insert(step.start.clone());
        times.insert(step.end());
    }
    let mut state = problem.init.clone();
    for t in &times {
        let mut dels = PropSet::new();
        let mut adds = PropSet::new();
        for step in &plan.steps {
            let action = &problem.actions[step.action];
            if step.start == *t {
                dels.extend(action.start.dels.iter().cloned());
                adds.extend(action.start.adds.iter().cloned());
            }
            if step.end() == *t {
                dels.extend(action.end.dels.iter().cloned());
                adds.extend(action.end.adds.iter().cloned());
            }
        }
        state = state.difference(&dels).cloned().collect();
        state.extend(adds.iter().cloned());
    }
    state
}

/// Builds a plan intended to be valid for `problem` under `epsilon`, then
/// replaces the problem's goal with a subset of the plan's final state so
/// the goal clause holds. Validity is aimed for, not guaranteed; callers
/// filter through the validator.
pub fn valid_plan(rng: &mut ChaCha8Rng, problem: &mut PlanningProblem, epsilon: &Rat) -> Plan {
    let mut steps = Vec::new();
    let mut state = problem.init.clone();
    let gap = if *epsilon > Rat::one() {
        epsilon.clone()
    } else {
        Rat::one()
    };
    let mut t = gap.clone();

    let target = rng.gen_range(0..=4);
    for _ in 0..target {
        let mut candidates = Vec::new();
        for (idx, action) in problem.actions.iter().enumerate() {
            if !action.start.pres.is_subset(&state) {
                continue;
            }
            let mid = apply(&state, &action.start);
            if !action.over_all.is_subset(&mid) || !action.end.pres.is_subset(&mid) {
                continue;
            }
            if let Some(d) = pick_duration(rng, action, &min_duration(action, epsilon)) {
                candidates.push((idx, d));
            }
        }
        let Some((idx, d)) = candidates.choose(rng).cloned() else {
            break;
        };
        let action = &problem.actions[idx];
        let mid = apply(&state, &action.start);
        state = apply(&mid, &action.end);
        steps.push(PlanStep::new(idx, t.clone(), d.clone()));
        t = &(&t + &d) + &gap;
    }

    // One concurrent occurrence of an action whose footprint is disjoint
    // from every scheduled action's footprint: it cannot interact with the
    // backbone, so it preserves validity while creating real overlap.
    if !steps.is_empty() && rng.gen_bool(0.6) {
        let used: BTreeSet<usize> = steps.iter().map(|s| s.action).collect();
        let mut used_props = PropSet::new();
        for idx in &used {
            used_props.extend(footprint(&problem.actions[*idx]).into_iter());
        }
        for (idx, action) in problem.actions.iter().enumerate() {
            if used.contains(&idx) || !footprint(action).is_disjoint(&used_props) {
                continue;
            }
            if !action.start.pres.is_subset(&problem.init) {
                continue;
            }
            let mid = apply(&problem.init, &action.start);
            if !action.over_all.is_subset(&mid) || !action.end.pres.is_subset(&mid) {
                continue;
            }
            if let Some(d) = pick_duration(rng, action, &min_duration(action, epsilon)) {
                steps.push(PlanStep::new(idx, &gap + &Rat::new(1, 2), d));
                break;
            }
        }
    }

    let plan = Plan::new(steps);
    let fin = final_state(problem, &plan);
    problem.goal = fin.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    plan
}

/// An unconstrained plan: random actions at quarter-grid times with random
/// durations, occasionally negative. Usually invalid.
pub fn random_plan(rng: &mut ChaCha8Rng, problem: &PlanningProblem) -> Plan {
    let steps = (0..rng.gen_range(0..=4))
        .map(|_| {
            let duration = if rng.gen_bool(0.06) {
                -quarters(rng, 1, 8)
            } else {
                quarters(rng, 0, 20)
            };
            PlanStep::new(
                rng.gen_range(0..problem.actions.len()),
                quarters(rng, 0, 24),
                duration,
            )
        })
        .collect();
    Plan::new(steps)
}
