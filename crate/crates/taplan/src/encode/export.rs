//! Serialization of encoded networks.
//!
//! Two formats are supported:
//!
//! * `internal`: the full network plus the symbol tables mapping problem
//!   entities to variable, clock, and automaton names, in one JSON document.
//!   This format round-trips: importing an exported document and exporting
//!   it again reproduces the bytes.
//! * `checker-compat`: a flattened, text-oriented rendering for external
//!   model checkers, with conditions, guards, and updates as strings and the
//!   reachability query spelled out. Export only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::planning::Prop;
use crate::rat::Rat;
use crate::ta::{Automaton, ClockId, Network, NetworkError, Transition, VarId};

use super::{ClockTable, EncodeOptions, EncodedNetwork, OwnClockScope, VarTable, GOAL_M};

/// Output format selector for [`export_network`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    /// Network plus symbol tables; round-trips through [`import_network`].
    Internal,
    /// Flattened rendering for external checkers; export only.
    CheckerCompat,
}

const FILE_FORMAT: &str = "taplan-network";
const FILE_VERSION: u32 = 1;

/// The `internal` document layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InternalFile {
    format: String,
    version: u32,
    network: Network,
    symbols: Symbols,
}

/// Symbol tables tying network names back to problem entities.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Symbols {
    action_order: Vec<String>,
    epsilon: Rat,
    strict_paper_ee_guard: bool,
    own_clock_scope: OwnClockScope,
    aa: VarId,
    ps: VarId,
    props: BTreeMap<Prop, PropSymbols>,
    action_clocks: BTreeMap<String, ActionClocks>,
    goal_location: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropSymbols {
    value: VarId,
    lock: VarId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionClocks {
    start: ClockId,
    end: ClockId,
}

fn symbols_of(enc: &EncodedNetwork) -> Symbols {
    Symbols {
        action_order: enc.action_order.clone(),
        epsilon: enc.options.epsilon.clone(),
        strict_paper_ee_guard: enc.options.strict_paper_ee_guard,
        own_clock_scope: enc.options.own_clock_scope,
        aa: enc.vars.aa.clone(),
        ps: enc.vars.ps.clone(),
        props: enc
            .vars
            .vp
            .iter()
            .map(|(p, value)| {
                (
                    p.clone(),
                    PropSymbols {
                        value: value.clone(),
                        lock: enc.vars.lp[p].clone(),
                    },
                )
            })
            .collect(),
        action_clocks: enc
            .clocks
            .start
            .iter()
            .map(|(a, start)| {
                (
                    a.clone(),
                    ActionClocks {
                        start: start.clone(),
                        end: enc.clocks.end[a].clone(),
                    },
                )
            })
            .collect(),
        goal_location: GOAL_M.to_string(),
    }
}

/// The symbol tables alone, as a JSON document (for a side-car file next to
/// a checker-compat export).
pub fn symbols_json(enc: &EncodedNetwork) -> String {
    let mut out = serde_json::to_string_pretty(&symbols_of(enc)).expect("symbols serialize");
    out.push('\n');
    out
}

/// Serializes an encoded network in the requested format. The result is a
/// JSON document with a trailing newline.
pub fn export_network(enc: &EncodedNetwork, format: ExportFormat) -> String {
    let mut out = match format {
        ExportFormat::Internal => {
            let file = InternalFile {
                format: FILE_FORMAT.to_string(),
                version: FILE_VERSION,
                network: enc.network.clone(),
                symbols: symbols_of(enc),
            };
            serde_json::to_string_pretty(&file).expect("network serialize")
        }
        ExportFormat::CheckerCompat => {
            serde_json::to_string_pretty(&checker_file(enc)).expect("network serialize")
        }
    };
    out.push('\n');
    out
}

/// Failure to reconstruct an encoded network from an `internal` document.
#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error("invalid network JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported file format `{0}` (expected `{FILE_FORMAT}`)")]
    UnsupportedFormat(String),
    #[error("unsupported file version {0} (expected {FILE_VERSION})")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("symbol table does not match the network: {0}")]
    SymbolMismatch(String),
}

/// Parses an `internal` document back into an [`EncodedNetwork`], checking
/// both the network's structural invariants and that the symbol tables agree
/// with it.
pub fn import_network(text: &str) -> Result<EncodedNetwork, ImportError> {
    let file: InternalFile = serde_json::from_str(text)?;
    if file.format != FILE_FORMAT {
        return Err(ImportError::UnsupportedFormat(file.format));
    }
    if file.version != FILE_VERSION {
        return Err(ImportError::UnsupportedVersion(file.version));
    }
    file.network.check()?;

    let symbols = file.symbols;
    let network = file.network;
    let mismatch = |m: String| Err(ImportError::SymbolMismatch(m));

    if network.automata.len() != symbols.action_order.len() + 1 {
        return mismatch(format!(
            "{} automata for {} actions (expected one per action plus main)",
            network.automata.len(),
            symbols.action_order.len()
        ));
    }
    if !network.automata[0]
        .locations
        .iter()
        .any(|l| l == &symbols.goal_location)
    {
        return mismatch(format!(
            "goal location `{}` is not a location of automaton 0",
            symbols.goal_location
        ));
    }
    for (i, action) in symbols.action_order.iter().enumerate() {
        let name = &network.automata[i + 1].name;
        if name != action {
            return mismatch(format!(
                "automaton {} is `{name}`, expected action `{action}`",
                i + 1
            ));
        }
        if !symbols.action_clocks.contains_key(action) {
            return mismatch(format!("action `{action}` has no clock entry"));
        }
    }
    if symbols.action_clocks.len() != symbols.action_order.len() {
        return mismatch("clock table and action order disagree on the action set".to_string());
    }

    let var_ids: std::collections::BTreeSet<&VarId> = network.vars.iter().map(|v| &v.id).collect();
    let clock_ids: std::collections::BTreeSet<&ClockId> = network.clocks.iter().collect();
    for id in [&symbols.aa, &symbols.ps] {
        if !var_ids.contains(id) {
            return mismatch(format!("counter variable `{id}` is not declared"));
        }
    }
    for (p, entry) in &symbols.props {
        for id in [&entry.value, &entry.lock] {
            if !var_ids.contains(id) {
                return mismatch(format!("variable `{id}` for `{p}` is not declared"));
            }
        }
    }
    for (a, entry) in &symbols.action_clocks {
        for id in [&entry.start, &entry.end] {
            if !clock_ids.contains(id) {
                return mismatch(format!("clock `{id}` for `{a}` is not declared"));
            }
        }
    }

    Ok(EncodedNetwork {
        network,
        vars: VarTable {
            vp: symbols
                .props
                .iter()
                .map(|(p, e)| (p.clone(), e.value.clone()))
                .collect(),
            lp: symbols
                .props
                .iter()
                .map(|(p, e)| (p.clone(), e.lock.clone()))
                .collect(),
            aa: symbols.aa,
            ps: symbols.ps,
        },
        clocks: ClockTable {
            start: symbols
                .action_clocks
                .iter()
                .map(|(a, e)| (a.clone(), e.start.clone()))
                .collect(),
            end: symbols
                .action_clocks
                .iter()
                .map(|(a, e)| (a.clone(), e.end.clone()))
                .collect(),
        },
        action_order: symbols.action_order,
        options: EncodeOptions {
            epsilon: symbols.epsilon,
            strict_paper_ee_guard: symbols.strict_paper_ee_guard,
            own_clock_scope: symbols.own_clock_scope,
        },
    })
}

/// The `checker-compat` document layout (serialize only).
#[derive(Serialize)]
struct CheckerFile {
    format: &'static str,
    formula: String,
    vars: Vec<CheckerVar>,
    clocks: Vec<ClockId>,
    automata: Vec<CheckerAutomaton>,
}

#[derive(Serialize)]
struct CheckerVar {
    name: VarId,
    lo: i64,
    hi: i64,
    init: i64,
}

#[derive(Serialize)]
struct CheckerAutomaton {
    name: String,
    initial: String,
    urgent: Vec<String>,
    locations: Vec<String>,
    edges: Vec<CheckerEdge>,
}

#[derive(Serialize)]
struct CheckerEdge {
    from: String,
    to: String,
    label: String,
    cond: String,
    guard: String,
    updates: Vec<String>,
    resets: Vec<ClockId>,
}

fn checker_edge(t: &Transition) -> CheckerEdge {
    let guard = if t.guard.is_empty() {
        "true".to_string()
    } else {
        t.guard
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(" && ")
    };
    CheckerEdge {
        from: t.from.clone(),
        to: t.to.clone(),
        label: t.label.clone(),
        cond: t.cond.to_string(),
        guard,
        updates: t
            .updates
            .iter()
            .map(|u| format!("{} := {}", u.var, u.expr))
            .collect(),
        resets: t.resets.clone(),
    }
}

fn checker_automaton(a: &Automaton) -> CheckerAutomaton {
    CheckerAutomaton {
        name: a.name.clone(),
        initial: a.initial.clone(),
        urgent: a.urgent.clone(),
        locations: a.locations.clone(),
        edges: a.transitions.iter().map(checker_edge).collect(),
    }
}

fn checker_file(enc: &EncodedNetwork) -> CheckerFile {
    CheckerFile {
        format: "checker-compat",
        formula: format!("E<> L[0] == {GOAL_M}"),
        vars: enc
            .network
            .vars
            .iter()
            .map(|v| CheckerVar {
                name: v.id.clone(),
                lo: v.lo,
                hi: v.hi,
                init: v.init,
            })
            .collect(),
        clocks: enc.network.clocks.clone(),
        automata: enc.network.automata.iter().map(checker_automaton).collect(),
    }
}
