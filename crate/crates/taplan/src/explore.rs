//! Bounded brute-force reachability over an encoded network.
//!
//! [`bounded_reach`] runs a breadth-first search from the initial
//! configuration, interleaving every enabled internal step with delays drawn
//! from a finite grid, until it reaches a configuration with the main
//! automaton at the goal location or exhausts its budget. It serves as an
//! independent check, on tiny instances, that accepting runs exist where
//! witness construction says they do, and that none exist up to a bound
//! where they should not.
//!
//! The search is sound but deliberately incomplete:
//!
//! * every returned run is re-verified by replay before being reported,
//! * absence is always reported as "not found within the budget", never as
//!   unsolvability, and the report distinguishes an exhausted search space
//!   (nothing left to explore under the grid) from an exhausted budget,
//! * visited-state pruning clamps clock values at the largest guard
//!   constant plus one; guards cannot distinguish values beyond it, so a
//!   pruned branch can only repeat guard-equivalent behavior.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::encode::EncodedNetwork;
use crate::rat::Rat;
use crate::ta::{run_check, Configuration, Network, Run, RunStep};

/// Limits for one [`bounded_reach`] call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum internal steps along any single path.
    pub max_internal_steps: usize,
    /// Candidate delay amounts; values must be nonnegative.
    pub delay_grid: Vec<Rat>,
    /// Maximum number of distinct configurations to explore.
    pub max_configs: usize,
}

impl SearchBudget {
    /// Budget with the default delay grid for the given network.
    pub fn with_default_grid(
        network: &Network,
        max_internal_steps: usize,
        max_configs: usize,
    ) -> Self {
        SearchBudget {
            max_internal_steps,
            delay_grid: default_delay_grid(network),
            max_configs,
        }
    }
}

/// Grid size cap for [`default_delay_grid`].
const GRID_CAP: usize = 24;

/// The default delay grid: zero, one, every constant appearing in a clock
/// guard, and all pairwise differences of those, smallest first, truncated
/// to a fixed size. The encoding's guards only compare clocks against these
/// constants, so on desk-scale instances this grid exercises the
/// goal-reaching behavior (a heuristic, not a completeness argument).
pub fn default_delay_grid(network: &Network) -> Vec<Rat> {
    let mut constants: BTreeSet<Rat> = BTreeSet::new();
    constants.insert(Rat::zero());
    constants.insert(Rat::one());
    for automaton in &network.automata {
        for t in &automaton.transitions {
            for g in &t.guard {
                constants.insert(g.bound.clone());
            }
        }
    }
    let base: Vec<Rat> = constants.iter().cloned().collect();
    for a in &base {
        for b in &base {
            if a > b {
                constants.insert(a - b);
            }
        }
    }
    constants.into_iter().take(GRID_CAP).collect()
}

/// Concurrency and tie-breaking knobs, separate from the budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Worker threads for frontier expansion (1 = sequential).
    pub workers: usize,
    /// When set, shuffles each configuration's successor order with this
    /// seed; useful for probing order sensitivity. Runs stay replay-checked.
    pub seed: Option<u64>,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            workers: 1,
            seed: None,
        }
    }
}

/// Why a search stopped without finding an accepting configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exhaustion {
    /// Nothing left to explore under the grid and step limit.
    Space,
    /// The configuration or step budget cut the search short.
    Budget,
}

/// A completed search that found no accepting configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotFound {
    pub explored: usize,
    pub exhausted: Exhaustion,
}

impl fmt::Display for NotFound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let how = match self.exhausted {
            Exhaustion::Space => "search space exhausted",
            Exhaustion::Budget => "budget exhausted",
        };
        write!(
            f,
            "not found <= budget ({} configurations explored; {how})",
            self.explored
        )
    }
}

/// Result of [`bounded_reach`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// An accepting run, already re-verified by replay.
    Found(Run),
    /// No accepting configuration within the explored space or budget.
    NotFound(NotFound),
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&Run> {
        match self {
            SearchOutcome::Found(run) => Some(run),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

/// One candidate move out of a configuration.
#[derive(Clone, Debug)]
enum Move {
    Delay(Rat),
    Internal { automaton: usize, transition: usize },
}

struct Node {
    config: Configuration,
    parent: Option<usize>,
    step: Option<Move>,
    internals: usize,
}

/// Breadth-first bounded reachability with the default options.
pub fn bounded_reach(enc: &EncodedNetwork, budget: &SearchBudget) -> SearchOutcome {
    bounded_reach_with(enc, budget, &ExploreOptions::default())
}

/// Breadth-first bounded reachability toward the accepting location.
///
/// Interleaves internal steps (counted against `max_internal_steps` per
/// path) with grid delays (uncounted; cycles are cut by visited-state
/// pruning on clamped clocks). The first accepting configuration in layer
/// order wins; its run is reconstructed from recorded configurations and
/// re-verified by replay before being returned.
pub fn bounded_reach_with(
    enc: &EncodedNetwork,
    budget: &SearchBudget,
    options: &ExploreOptions,
) -> SearchOutcome {
    let net = &enc.network;
    let clamp_at = net.max_guard_bound() + Rat::one();

    let initial = enc.initial_configuration();
    if enc.accepting(&initial) {
        let run = Run {
            initial,
            steps: Vec::new(),
        };
        assert!(run_check(net, &run));
        return SearchOutcome::Found(run);
    }

    let mut nodes: Vec<Node> = vec![Node {
        config: initial,
        parent: None,
        step: None,
        internals: 0,
    }];
    let mut visited: BTreeSet<(Vec<String>, Vec<i64>, Vec<Rat>)> =
        BTreeSet::from([prune_key(net, &nodes[0].config, &clamp_at)]);
    let mut frontier: Vec<usize> = vec![0];
    let mut budget_limited = false;

    let expand = |index: usize, node_config: &Configuration, internals: usize| {
        let mut moves: Vec<(Move, Configuration)> = Vec::new();
        let mut truncated = false;
        if internals < budget.max_internal_steps {
            for (a, automaton) in net.automata.iter().enumerate() {
                for t in 0..automaton.transitions.len() {
                    if let Ok(after) = net.internal(node_config, a, t) {
                        moves.push((
                            Move::Internal {
                                automaton: a,
                                transition: t,
                            },
                            after,
                        ));
                    }
                }
            }
        } else {
            truncated = true;
        }
        for delta in &budget.delay_grid {
            if let Ok(after) = net.delay(node_config, delta) {
                moves.push((Move::Delay(delta.clone()), after));
            }
        }
        if let Some(seed) = options.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
            moves.shuffle(&mut rng);
        }
        (index, moves, truncated)
    };

    let pool = (options.workers > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .expect("worker pool")
    });

    while !frontier.is_empty() {
        let layer: Vec<(usize, Configuration, usize)> = frontier
            .iter()
            .map(|&i| (i, nodes[i].config.clone(), nodes[i].internals))
            .collect();
        let expansions: Vec<(usize, Vec<(Move, Configuration)>, bool)> = match &pool {
            Some(pool) => pool.install(|| {
                layer
                    .par_iter()
                    .map(|(i, q, d)| expand(*i, q, *d))
                    .collect()
            }),
            None => layer.iter().map(|(i, q, d)| expand(*i, q, *d)).collect(),
        };

        frontier = Vec::new();
        for (parent, moves, truncated) in expansions {
            budget_limited |= truncated;
            for (mv, after) in moves {
                if !visited.insert(prune_key(net, &after, &clamp_at)) {
                    continue;
                }
                if nodes.len() >= budget.max_configs {
                    return finish(&nodes, true);
                }
                let internals =
                    nodes[parent].internals + usize::from(matches!(mv, Move::Internal { .. }));
                let accepting = enc.accepting(&after);
                nodes.push(Node {
                    config: after,
                    parent: Some(parent),
                    step: Some(mv),
                    internals,
                });
                if accepting {
                    return SearchOutcome::Found(reconstruct(enc, &nodes, nodes.len() - 1));
                }
                frontier.push(nodes.len() - 1);
            }
        }
    }
    finish(&nodes, budget_limited)
}

fn finish(nodes: &[Node], budget_limited: bool) -> SearchOutcome {
    SearchOutcome::NotFound(NotFound {
        explored: nodes.len(),
        exhausted: if budget_limited {
            Exhaustion::Budget
        } else {
            Exhaustion::Space
        },
    })
}

/// Pruning key: locations, variables, and clocks clamped at one past the
/// largest guard constant. Two configurations with equal keys satisfy
/// exactly the same guards now and after any common suffix of moves.
fn prune_key(
    net: &Network,
    q: &Configuration,
    clamp_at: &Rat,
) -> (Vec<String>, Vec<i64>, Vec<Rat>) {
    (
        q.locations.clone(),
        net.vars.iter().map(|v| q.vars[&v.id]).collect(),
        net.clocks
            .iter()
            .map(|c| q.clocks[c].clone().min(clamp_at.clone()))
            .collect(),
    )
}

/// Rebuilds the run to `target` from recorded configurations and replays it.
fn reconstruct(enc: &EncodedNetwork, nodes: &[Node], target: usize) -> Run {
    let mut path = Vec::new();
    let mut at = target;
    while let Some(parent) = nodes[at].parent {
        let step = match nodes[at].step.as_ref().expect("non-root node has a step") {
            Move::Delay(delta) => RunStep::Delay {
                delta: delta.clone(),
                after: nodes[at].config.clone(),
            },
            Move::Internal {
                automaton,
                transition,
            } => RunStep::Internal {
                automaton: *automaton,
                transition: *transition,
                after: nodes[at].config.clone(),
            },
        };
        path.push(step);
        at = parent;
    }
    path.reverse();
    let run = Run {
        initial: nodes[0].config.clone(),
        steps: path,
    };
    assert!(
        run_check(&enc.network, &run),
        "explorer produced a run that does not replay"
    );
    assert!(enc.accepting(run.last_configuration()));
    run
}
