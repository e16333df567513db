//! Runs: recorded step sequences that double as replayable certificates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rat::Rat;
use crate::ta::{Configuration, Network, StepError};

/// One recorded step together with the configuration it produced.
///
/// Keeping the post-configuration makes divergence diagnostics precise; the
/// replay in [`Run::replay`] remains the source of truth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RunStep {
    Delay {
        delta: Rat,
        after: Configuration,
    },
    Internal {
        automaton: usize,
        transition: usize,
        after: Configuration,
    },
}

impl RunStep {
    pub fn after(&self) -> &Configuration {
        match self {
            RunStep::Delay { after, .. } => after,
            RunStep::Internal { after, .. } => after,
        }
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, RunStep::Internal { .. })
    }
}

/// A recorded execution of a network: a start configuration and the steps
/// taken from it. Delay and internal steps may appear in any order; zero
///-length delays are legal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    pub initial: Configuration,
    pub steps: Vec<RunStep>,
}

/// Why replay rejected a run, and at which step (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub step: usize,
    pub reason: DivergenceReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivergenceReason {
    /// The recorded step is not executable from the replayed state.
    StepFailed(StepError),
    /// The step executed but produced a different configuration than the one
    /// recorded.
    Mismatch { computed: Box<Configuration> },
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            DivergenceReason::StepFailed(err) => {
                write!(f, "step {} not executable: {err}", self.step)
            }
            DivergenceReason::Mismatch { .. } => write!(
                f,
                "step {} executed but its recorded configuration differs from the replay",
                self.step
            ),
        }
    }
}

impl Run {
    /// A run with no steps, starting (and ending) at `initial`.
    pub fn empty(initial: Configuration) -> Run {
        Run {
            initial,
            steps: Vec::new(),
        }
    }

    /// All configurations the run passes through: the initial one, then the
    /// state after each step.
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(RunStep::after))
    }

    pub fn last_configuration(&self) -> &Configuration {
        self.steps
            .last()
            .map(RunStep::after)
            .unwrap_or(&self.initial)
    }

    /// Re-executes every recorded step label from the initial configuration,
    /// demanding that each succeeds and reproduces the recorded state.
    pub fn replay(&self, net: &Network) -> Result<(), Divergence> {
        let mut current = self.initial.clone();
        for (step, recorded) in self.steps.iter().enumerate() {
            let computed = match recorded {
                RunStep::Delay { delta, .. } => net.delay(&current, delta),
                RunStep::Internal {
                    automaton,
                    transition,
                    ..
                } => net.internal(&current, *automaton, *transition),
            };
            let computed = computed.map_err(|err| Divergence {
                step,
                reason: DivergenceReason::StepFailed(err),
            })?;
            if computed != *recorded.after() {
                return Err(Divergence {
                    step,
                    reason: DivergenceReason::Mismatch {
                        computed: Box::new(computed),
                    },
                });
            }
            current = computed;
        }
        Ok(())
    }

    /// True iff some configuration of the run satisfies the predicate; the
    /// reachability acceptance check, applied to an already-replayed run.
    pub fn reaches(&self, pred: impl Fn(&Configuration) -> bool) -> bool {
        self.configurations().any(|q| pred(q))
    }
}

/// Replay as a plain Boolean.
pub fn run_check(net: &Network, run: &Run) -> bool {
    run.replay(net).is_ok()
}
