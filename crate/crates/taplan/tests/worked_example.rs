//! The rooms/robots/doors fixture checked against hand-computed expectations:
//! the induced timeline, the state at every happening, and the encoded
//! network's dimensions.

mod common;

use common::fixture;
use taplan::encode::{encode, EncodeOptions};
use taplan::planning::{
    happening_times, parse_plan, prop_set, state_sequence, timed_snaps, validate_plan, Plan,
    PlanningProblem, PropSet,
};
use taplan::rat::Rat;

fn rooms() -> (PlanningProblem, Plan) {
    let text = std::fs::read_to_string(fixture("rooms.json")).unwrap();
    let problem: PlanningProblem = serde_json::from_str(&text).unwrap();
    problem.check().unwrap();
    let plan = parse_plan(
        &problem,
        &std::fs::read_to_string(fixture("rooms_valid.plan")).unwrap(),
    )
    .unwrap();
    (problem, plan)
}

#[test]
fn fixture_has_the_published_dimensions() {
    let (problem, _) = rooms();
    assert_eq!(problem.props.len(), 16);
    assert_eq!(problem.actions.len(), 24);
    let enc = encode(&problem, &EncodeOptions::default());
    assert_eq!(enc.network.vars.len(), 2 * 16 + 2);
    assert_eq!(enc.network.clocks.len(), 2 * 24);
    let locations: usize = enc.network.automata.iter().map(|m| m.locations.len()).sum();
    assert_eq!(locations, 3 + 4 * 24);
    let transitions: usize = enc
        .network
        .automata
        .iter()
        .map(|m| m.transitions.len())
        .sum();
    assert_eq!(transitions, 3 + 5 * 24);
}

#[test]
fn schedule_induces_eight_snaps_at_six_happenings() {
    let (_, plan) = rooms();
    assert_eq!(timed_snaps(&plan).len(), 8);
    let times: Vec<Rat> = happening_times(&plan);
    let expected: Vec<Rat> = [2, 5, 6, 8, 9, 12].map(Rat::from_int).to_vec();
    assert_eq!(times, expected);
}

/// State at each happening, simulated by hand from the action definitions:
///
/// * t=2: open_door_rb2 starts, consuming idle(rb2) and closed(d);
/// * t=5: it ends (door open, rb2 idle) while move_rb1 starts;
/// * t=6: move_rb2 starts;
/// * t=8: move_rb2 ends (rb2 idle in rm2);
/// * t=9: move_rb1 ends while close_door_rb2 starts;
/// * t=12: close_door_rb2 ends (door closed, rb2 idle).
#[test]
fn states_match_the_hand_simulation() {
    let (problem, plan) = rooms();
    let base = ["in(b,rm1)", "connects(d,rm1,rm2)", "connects(d,rm2,rm1)"];
    let with = |extra: &[&str]| -> PropSet { prop_set(base.iter().chain(extra).copied()) };
    let expected = vec![
        with(&[
            "idle(rb1)",
            "idle(rb2)",
            "closed(d)",
            "in(rb1,rm1)",
            "in(rb2,rm1)",
        ]),
        with(&["idle(rb1)", "in(rb1,rm1)", "in(rb2,rm1)"]),
        with(&["idle(rb2)", "open(d)", "in(rb2,rm1)"]),
        with(&["open(d)"]),
        with(&["open(d)", "idle(rb2)", "in(rb2,rm2)"]),
        with(&["idle(rb1)", "in(rb1,rm2)", "in(rb2,rm2)"]),
        with(&[
            "idle(rb1)",
            "in(rb1,rm2)",
            "in(rb2,rm2)",
            "idle(rb2)",
            "closed(d)",
        ]),
    ];
    assert_eq!(state_sequence(&problem, &plan), expected);
}

#[test]
fn tighter_separation_margins_change_the_verdict() {
    let (problem, plan) = rooms();
    // The closest mutex pair sits 1 apart (move_rb2 ends at 8, close_door
    // starts at 9 and needs idle(rb2)). Margins up to 1 pass, larger fail.
    assert!(validate_plan(&problem, &plan, &Rat::one())
        .unwrap()
        .is_valid());
    let verdict = validate_plan(&problem, &plan, &Rat::new(5, 4)).unwrap();
    assert!(!verdict.is_valid());
    assert!(verdict.violations.iter().all(|v| v.clause() == "6"));
}
