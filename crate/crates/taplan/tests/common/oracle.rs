//! Independent re-implementation of the plan-validity judgment, used to
//! cross-check the library validator clause by clause.
//!
//! The structure is deliberately different from the library: the timeline is
//! an event map keyed by time, states are folded in place, and each clause
//! is decided in its own pass. Only the verdict granularity is shared: the
//! set of violated clause labels (`1a`, `1b`, `3`, `4`, `5`, `6`).

use std::collections::{BTreeMap, BTreeSet};

use taplan::planning::{Plan, PlanningProblem, PropSet, SnapAction};
use taplan::rat::Rat;

/// The clause labels violated by `plan`, per the validity definition. The
/// library's verdict must agree with this set exactly.
pub fn violated_clauses(
    problem: &PlanningProblem,
    plan: &Plan,
    epsilon: &Rat,
) -> BTreeSet<&'static str> {
    let mut out = BTreeSet::new();

    // Timeline: at each instant, the set of snap actions that execute there.
    // Set semantics: the same action's same snap at the same time counts once.
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Occurrence {
        action: usize,
        is_start: bool,
    }
    let mut timeline: BTreeMap<Rat, BTreeSet<Occurrence>> = BTreeMap::new();
    for step in &plan.steps {
        timeline
            .entry(step.start.clone())
            .or_default()
            .insert(Occurrence {
                action: step.action,
                is_start: true,
            });
        timeline
            .entry(&step.start + &step.duration)
            .or_default()
            .insert(Occurrence {
                action: step.action,
                is_start: false,
            });
    }
    let snap_of = |occ: &Occurrence| -> &SnapAction {
        let action = &problem.actions[occ.action];
        if occ.is_start {
            &action.start
        } else {
            &action.end
        }
    };

    // Clauses 1a and 1b: fold the state through the timeline, checking
    // preconditions of the instant's snaps and invariants of the actions
    // running across the instant against the pre-effect state.
    let mut state = problem.init.clone();
    for (t, occs) in &timeline {
        for occ in occs {
            if !snap_of(occ).pres.is_subset(&state) {
                out.insert("1a");
            }
        }
        for step in &plan.steps {
            let running = step.start < *t && *t <= &step.start + &step.duration;
            if running && !problem.actions[step.action].over_all.is_subset(&state) {
                out.insert("1b");
            }
        }
        let mut next: PropSet = state
            .iter()
            .filter(|p| !occs.iter().any(|occ| snap_of(occ).dels.contains(*p)))
            .cloned()
            .collect();
        for occ in occs {
            next.extend(snap_of(occ).adds.iter().cloned());
        }
        state = next;
    }

    // Clause 3: the goal holds in the final state.
    if !problem.goal.is_subset(&state) {
        out.insert("3");
    }

    // Clauses 4 and 5: duration bounds and nonnegative durations.
    for step in &plan.steps {
        let action = &problem.actions[step.action];
        let lower_ok = if action.lower.strict {
            action.lower.value < step.duration
        } else {
            action.lower.value <= step.duration
        };
        let upper_ok = if action.upper.strict {
            step.duration < action.upper.value
        } else {
            step.duration <= action.upper.value
        };
        if !(lower_ok && upper_ok) {
            out.insert("4");
        }
        if step.duration < Rat::zero() {
            out.insert("5");
        }
    }

    // Clause 6: every pair of distinct timed mutex snaps sits strictly apart
    // and at least epsilon apart.
    let placed: Vec<(&Rat, &Occurrence)> = timeline
        .iter()
        .flat_map(|(t, occs)| occs.iter().map(move |occ| (t, occ)))
        .collect();
    for (i, (s, a)) in placed.iter().enumerate() {
        for (t, b) in &placed[i + 1..] {
            if !interferes(snap_of(a), snap_of(b)) {
                continue;
            }
            let gap = if s <= t { *t - *s } else { *s - *t };
            if gap.is_zero() || gap < *epsilon {
                out.insert("6");
            }
        }
    }

    out
}

/// Mutex test, restated from the definition: preconditions of one meet
/// effects of the other, or adds of one meet deletes of the other.
fn interferes(a: &SnapAction, b: &SnapAction) -> bool {
    let meets = |x: &PropSet, y: &PropSet| x.iter().any(|p| y.contains(p));
    meets(&a.pres, &b.adds)
        || meets(&a.pres, &b.dels)
        || meets(&b.pres, &a.adds)
        || meets(&b.pres, &a.dels)
        || meets(&a.adds, &b.dels)
        || meets(&a.dels, &b.adds)
}
