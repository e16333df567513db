//! Compilation of a planning problem into a network of timed automata.
//!
//! The encoding uses:
//!
//! * two integer variables per proposition `p`: `vp.<p>` (is `p` true) and
//!   `lp.<p>` (how many running actions hold `p` as an invariant),
//! * a global running-action counter `aa` and a phase variable `ps`
//!   (0 = before start, 1 = planning, 2 = goal reached),
//! * two clocks per action: `ca.<a>.S` since the action last started and
//!   `ca.<a>.E` since it last ended,
//! * a main automaton (`init_M` → `plan_M` → `goal_M`) that installs the
//!   initial state, then certifies the goal once no action is running,
//! * one automaton per action with locations `inactive`, `starting`,
//!   `running`, `ending` (the middle two urgent) and five transitions:
//!   `se` (start snap effects), `se'` (lock invariants), `ee` (unlock
//!   invariants, check duration), `ee'` (end snap effects), and `ie`
//!   (instantaneous bypass of the running location).
//!
//! Mutual exclusion between snap actions becomes clock guards: a transition
//! simulating snap `h` requires every interfering snap's clock to be
//! strictly positive (and at least `epsilon` when a margin is configured),
//! i.e. that snap must not have fired at this very instant.
//!
//! The accepting states are exactly those with the main automaton at
//! `goal_M`; reachability of `goal_M` corresponds to plan existence.

mod export;

pub use export::{export_network, import_network, symbols_json, ExportFormat, ImportError};

use std::collections::BTreeMap;

use crate::planning::{DurativeAction, PlanningProblem, Prop, SnapKind};
use crate::rat::Rat;
use crate::ta::{
    Automaton, BExpr, ClockConstraint, ClockId, Configuration, Network, Rel, Transition, Update,
    VarDecl, VarId,
};

/// Transition labels used by the encoding. Stored on every transition and
/// used by witness construction and the timeline output.
pub mod labels {
    /// Main automaton: install the initial state.
    pub const E1M: &str = "e1M";
    /// Main automaton: certify the goal.
    pub const E2M: &str = "e2M";
    /// Main automaton: self-loop on the goal location.
    pub const C_LOOP: &str = "c";
    /// Action start: apply start snap effects.
    pub const SE: &str = "se";
    /// Action start: lock the invariants.
    pub const SE_PRIME: &str = "se'";
    /// Action end: unlock the invariants, check the duration.
    pub const EE: &str = "ee";
    /// Action end: apply end snap effects.
    pub const EE_PRIME: &str = "ee'";
    /// Instantaneous action: skip the running location.
    pub const IE: &str = "ie";
}

/// Location ids of the main automaton.
pub const INIT_M: &str = "init_M";
pub const PLAN_M: &str = "plan_M";
pub const GOAL_M: &str = "goal_M";

/// Which of an action's own clocks a transition's mutex guard may mention.
///
/// The guard for a snap `h` of action `a` never constrains `h`'s own clock
/// (the transition is about to reset it). Whether it may constrain `a`'s
/// *other* snap's clock is a modelling choice; the default includes it
/// whenever the two snaps interfere, which matches the separation the
/// validator enforces between an action's own start and end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OwnClockScope {
    /// Exclude only the acting snap's clock (default).
    #[default]
    ActingSnapOnly,
    /// Exclude both of the acting action's clocks.
    BothOwnSnaps,
}

/// Encoding options.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Minimum separation margin between interfering snap actions.
    pub epsilon: Rat,
    /// Reproduce the source text's `ee` guard literally, which constrains
    /// the clocks interfering with the *start* snap instead of the end snap.
    /// The corrected reading (default false) guards the end snap, mirroring
    /// `ie`.
    pub strict_paper_ee_guard: bool,
    /// See [`OwnClockScope`].
    pub own_clock_scope: OwnClockScope,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            epsilon: Rat::zero(),
            strict_paper_ee_guard: false,
            own_clock_scope: OwnClockScope::default(),
        }
    }
}

impl EncodeOptions {
    pub fn with_epsilon(epsilon: Rat) -> Self {
        EncodeOptions {
            epsilon,
            ..Default::default()
        }
    }
}

/// Variable ids of the encoding, keyed by the problem entities they track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarTable {
    /// `vp.<p>`: proposition value, domain [0, 1].
    pub vp: BTreeMap<Prop, VarId>,
    /// `lp.<p>`: invariant lock count, domain [0, |A|].
    pub lp: BTreeMap<Prop, VarId>,
    /// Running-action counter, domain [0, |A|].
    pub aa: VarId,
    /// Phase, domain [0, 2].
    pub ps: VarId,
}

/// Clock ids of the encoding, two per action, keyed by action name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockTable {
    pub start: BTreeMap<String, ClockId>,
    pub end: BTreeMap<String, ClockId>,
}

impl ClockTable {
    /// The clock recording time since the given snap of `action` last fired.
    pub fn of(&self, action: &str, kind: SnapKind) -> &ClockId {
        match kind {
            SnapKind::Start => &self.start[action],
            SnapKind::End => &self.end[action],
        }
    }
}

/// The compiled network plus the symbol tables tying it back to the problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedNetwork {
    pub network: Network,
    pub vars: VarTable,
    pub clocks: ClockTable,
    /// Action names in automaton order; automaton `i + 1` simulates
    /// `action_order[i]`. Automaton 0 is the main automaton.
    pub action_order: Vec<String>,
    /// The options the network was built with.
    pub options: EncodeOptions,
}

impl EncodedNetwork {
    /// Index of the automaton simulating the named action.
    pub fn automaton_of(&self, action: &str) -> Option<usize> {
        self.action_order
            .iter()
            .position(|a| a == action)
            .map(|i| i + 1)
    }

    /// Index of the transition with the given label within an automaton.
    pub fn transition_index(&self, automaton: usize, label: &str) -> Option<usize> {
        self.network.automata[automaton]
            .transitions
            .iter()
            .position(|t| t.label == label)
    }

    /// The canonical start configuration (locations initial, all variables
    /// and clocks zero).
    pub fn initial_configuration(&self) -> Configuration {
        self.network.initial_configuration()
    }

    /// The acceptance predicate: the main automaton has reached `goal_M`.
    pub fn accepting(&self, q: &Configuration) -> bool {
        q.locations[0] == GOAL_M
    }
}

fn vp_id(p: &Prop) -> VarId {
    format!("vp.{p}")
}

fn lp_id(p: &Prop) -> VarId {
    format!("lp.{p}")
}

/// Builds the variable table: two variables per proposition plus `aa`, `ps`.
pub fn encode_vars(problem: &PlanningProblem) -> VarTable {
    VarTable {
        vp: problem
            .props
            .iter()
            .map(|p| (p.clone(), vp_id(p)))
            .collect(),
        lp: problem
            .props
            .iter()
            .map(|p| (p.clone(), lp_id(p)))
            .collect(),
        aa: "aa".to_string(),
        ps: "ps".to_string(),
    }
}

/// Builds the clock table: a start and an end clock per action.
pub fn encode_clocks(problem: &PlanningProblem) -> ClockTable {
    ClockTable {
        start: problem
            .actions
            .iter()
            .map(|a| (a.name.clone(), format!("ca.{}.S", a.name)))
            .collect(),
        end: problem
            .actions
            .iter()
            .map(|a| (a.name.clone(), format!("ca.{}.E", a.name)))
            .collect(),
    }
}

/// The clock guards enforcing separation from every snap action interfering
/// with the acting snap `(action, kind)`.
///
/// For each interfering snap `g` (scanned in problem order, start before
/// end), the guard requires `g`'s clock to be strictly positive, plus at
/// least `epsilon` when a positive margin is configured. The acting snap's
/// own clock is never constrained; `scope` controls whether the acting
/// action's other snap is.
pub fn mutex_guards(
    problem: &PlanningProblem,
    acting_action: usize,
    acting_kind: SnapKind,
    clocks: &ClockTable,
    options: &EncodeOptions,
) -> Vec<ClockConstraint> {
    let acting = problem.snap(acting_action, acting_kind);
    let mut out = Vec::new();
    for (j, other) in problem.actions.iter().enumerate() {
        for kind in [SnapKind::Start, SnapKind::End] {
            let excluded = match options.own_clock_scope {
                OwnClockScope::ActingSnapOnly => j == acting_action && kind == acting_kind,
                OwnClockScope::BothOwnSnaps => j == acting_action,
            };
            if excluded || !crate::planning::mutex(acting, other.snap(kind)) {
                continue;
            }
            let clock = clocks.of(&other.name, kind).clone();
            out.push(ClockConstraint {
                clock: clock.clone(),
                rel: Rel::Gt,
                bound: Rat::zero(),
            });
            if !options.epsilon.is_zero() {
                out.push(ClockConstraint {
                    clock,
                    rel: Rel::Ge,
                    bound: options.epsilon.clone(),
                });
            }
        }
    }
    out
}

/// The duration-bound guard on an action's start clock, checked when the
/// action ends: `lower <= ca.S <= upper` with strict relations where the
/// bounds are strict.
pub fn sat_dur_bounds(action: &DurativeAction, clocks: &ClockTable) -> Vec<ClockConstraint> {
    let clock = clocks.start[&action.name].clone();
    vec![
        ClockConstraint {
            clock: clock.clone(),
            rel: if action.lower.strict {
                Rel::Gt
            } else {
                Rel::Ge
            },
            bound: action.lower.value.clone(),
        },
        ClockConstraint {
            clock,
            rel: if action.upper.strict {
                Rel::Lt
            } else {
                Rel::Le
            },
            bound: action.upper.value.clone(),
        },
    ]
}

/// The variable updates realizing a snap action's effects: deleted
/// propositions drop to 0 unless re-added, added propositions rise to 1.
pub fn prop_effs(snap: &crate::planning::SnapAction, vars: &VarTable) -> Vec<Update> {
    let mut out = Vec::new();
    for p in snap.dels.difference(&snap.adds) {
        out.push(Update::set(vars.vp[p].clone(), 0));
    }
    for p in &snap.adds {
        out.push(Update::set(vars.vp[p].clone(), 1));
    }
    out
}

/// The condition that a snap action's preconditions hold: every
/// precondition's value variable is 1.
pub fn pre_sat(snap: &crate::planning::SnapAction, vars: &VarTable) -> BExpr {
    BExpr::and_all(
        snap.pres
            .iter()
            .map(|p| BExpr::var_eq_int(vars.vp[p].clone(), 1)),
    )
}

/// The condition that a snap action's effects break no active invariant:
/// every proposition it deletes (and does not re-add) is lock-free.
pub fn eff_sat_invs(snap: &crate::planning::SnapAction, vars: &VarTable) -> BExpr {
    BExpr::and_all(
        snap.dels
            .difference(&snap.adds)
            .map(|p| BExpr::var_eq_int(vars.lp[p].clone(), 0)),
    )
}

/// Builds the main automaton: urgent `init_M` installs the initial state via
/// `e1M`, `plan_M` hosts the planning phase, `e2M` moves to `goal_M` once the
/// goal holds with no action running, and `c` self-loops there.
pub fn build_main_automaton(problem: &PlanningProblem, vars: &VarTable) -> Automaton {
    let mut install = vec![Update::set(vars.ps.clone(), 1)];
    install.extend(
        problem
            .init
            .iter()
            .map(|p| Update::set(vars.vp[p].clone(), 1)),
    );

    let goal_cond = BExpr::and_all(
        std::iter::once(BExpr::var_eq_int(vars.aa.clone(), 0)).chain(
            problem
                .goal
                .iter()
                .map(|p| BExpr::var_eq_int(vars.vp[p].clone(), 1)),
        ),
    );

    Automaton {
        name: "main".to_string(),
        locations: vec![INIT_M.into(), PLAN_M.into(), GOAL_M.into()],
        initial: INIT_M.into(),
        urgent: vec![INIT_M.into()],
        transitions: vec![
            Transition {
                from: INIT_M.into(),
                cond: BExpr::True,
                guard: vec![],
                updates: install,
                resets: vec![],
                to: PLAN_M.into(),
                label: labels::E1M.into(),
            },
            Transition {
                from: PLAN_M.into(),
                cond: goal_cond,
                guard: vec![],
                updates: vec![Update::set(vars.ps.clone(), 2)],
                resets: vec![],
                to: GOAL_M.into(),
                label: labels::E2M.into(),
            },
            Transition {
                from: GOAL_M.into(),
                cond: BExpr::True,
                guard: vec![],
                updates: vec![],
                resets: vec![],
                to: GOAL_M.into(),
                label: labels::C_LOOP.into(),
            },
        ],
    }
}

/// Builds the automaton simulating one action.
pub fn build_action_automaton(
    problem: &PlanningProblem,
    action_idx: usize,
    vars: &VarTable,
    clocks: &ClockTable,
    options: &EncodeOptions,
) -> Automaton {
    let action = &problem.actions[action_idx];
    let name = &action.name;
    let loc = |suffix: &str| format!("{name}.{suffix}");
    let ps1 = || BExpr::var_eq_int(vars.ps.clone(), 1);

    let lock_updates: Vec<Update> = action
        .over_all
        .iter()
        .map(|p| Update::shift(vars.lp[p].clone(), 1))
        .collect();
    let unlock_updates: Vec<Update> = action
        .over_all
        .iter()
        .map(|p| Update::shift(vars.lp[p].clone(), -1))
        .collect();
    let invs_hold = BExpr::and_all(
        action
            .over_all
            .iter()
            .map(|p| BExpr::var_eq_int(vars.vp[p].clone(), 1)),
    );

    // The end transitions guard against snaps interfering with the end snap;
    // the strict-paper mode reproduces the source text's start-snap guard on
    // `ee` (its `ie` line uses the end snap either way).
    let ee_guard_kind = if options.strict_paper_ee_guard {
        SnapKind::Start
    } else {
        SnapKind::End
    };
    let mut ee_guard = mutex_guards(problem, action_idx, ee_guard_kind, clocks, options);
    ee_guard.extend(sat_dur_bounds(action, clocks));
    let mut ie_guard = mutex_guards(problem, action_idx, SnapKind::End, clocks, options);
    ie_guard.extend(sat_dur_bounds(action, clocks));

    let mut se_updates = prop_effs(&action.start, vars);
    se_updates.push(Update::shift(vars.aa.clone(), 1));
    let mut ee_prime_updates = prop_effs(&action.end, vars);
    ee_prime_updates.push(Update::shift(vars.aa.clone(), -1));

    Automaton {
        name: name.clone(),
        locations: vec![
            loc("inactive"),
            loc("starting"),
            loc("running"),
            loc("ending"),
        ],
        initial: loc("inactive"),
        urgent: vec![loc("starting"), loc("ending")],
        transitions: vec![
            Transition {
                from: loc("inactive"),
                cond: ps1()
                    .and(pre_sat(&action.start, vars))
                    .and(eff_sat_invs(&action.start, vars)),
                guard: mutex_guards(problem, action_idx, SnapKind::Start, clocks, options),
                updates: se_updates,
                resets: vec![clocks.start[name].clone()],
                to: loc("starting"),
                label: labels::SE.into(),
            },
            Transition {
                from: loc("starting"),
                cond: ps1().and(invs_hold),
                guard: vec![],
                updates: lock_updates,
                resets: vec![],
                to: loc("running"),
                label: labels::SE_PRIME.into(),
            },
            Transition {
                from: loc("running"),
                cond: ps1(),
                guard: ee_guard,
                updates: unlock_updates,
                resets: vec![clocks.end[name].clone()],
                to: loc("ending"),
                label: labels::EE.into(),
            },
            Transition {
                from: loc("ending"),
                cond: ps1()
                    .and(pre_sat(&action.end, vars))
                    .and(eff_sat_invs(&action.end, vars)),
                guard: vec![],
                updates: ee_prime_updates,
                resets: vec![],
                to: loc("inactive"),
                label: labels::EE_PRIME.into(),
            },
            Transition {
                from: loc("starting"),
                cond: ps1(),
                guard: ie_guard,
                updates: vec![],
                resets: vec![clocks.end[name].clone()],
                to: loc("ending"),
                label: labels::IE.into(),
            },
        ],
    }
}

/// Compiles a problem into its network: automaton 0 is the main automaton,
/// followed by one automaton per action in problem order.
pub fn encode(problem: &PlanningProblem, options: &EncodeOptions) -> EncodedNetwork {
    let vars = encode_vars(problem);
    let clocks = encode_clocks(problem);
    let actions = problem.actions.len() as i64;

    let mut decls = Vec::with_capacity(problem.props.len() * 2 + 2);
    for p in &problem.props {
        decls.push(VarDecl {
            id: vars.vp[p].clone(),
            lo: 0,
            hi: 1,
            init: 0,
        });
    }
    for p in &problem.props {
        decls.push(VarDecl {
            id: vars.lp[p].clone(),
            lo: 0,
            hi: actions,
            init: 0,
        });
    }
    decls.push(VarDecl {
        id: vars.aa.clone(),
        lo: 0,
        hi: actions,
        init: 0,
    });
    decls.push(VarDecl {
        id: vars.ps.clone(),
        lo: 0,
        hi: 2,
        init: 0,
    });

    let mut clock_ids = Vec::with_capacity(problem.actions.len() * 2);
    for a in &problem.actions {
        clock_ids.push(clocks.start[&a.name].clone());
        clock_ids.push(clocks.end[&a.name].clone());
    }

    let mut automata = Vec::with_capacity(problem.actions.len() + 1);
    automata.push(build_main_automaton(problem, &vars));
    for idx in 0..problem.actions.len() {
        automata.push(build_action_automaton(
            problem, idx, &vars, &clocks, options,
        ));
    }

    let network = Network {
        vars: decls,
        clocks: clock_ids,
        automata,
    };
    debug_assert_eq!(
        network.check(),
        Ok(()),
        "encoder produced an inconsistent network"
    );

    EncodedNetwork {
        network,
        vars,
        clocks,
        action_order: problem.actions.iter().map(|a| a.name.clone()).collect(),
        options: options.clone(),
    }
}

/// Conjuncts of a condition, flattening nested conjunctions.
#[cfg(test)]
pub(crate) fn conjuncts(b: &BExpr) -> Vec<&BExpr> {
    match b {
        BExpr::And { left, right } => {
            let mut out = conjuncts(left);
            out.extend(conjuncts(right));
            out
        }
        other => vec![other],
    }
}
