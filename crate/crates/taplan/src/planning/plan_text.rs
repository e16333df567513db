//! The plan file format: one step per line, `<t>: (<action-name>) [<d>]`.
//!
//! ```text
//! # a comment line
//! 2: (open_door_rb2_d_rm1) [3]
//! 5: (move_rb1_d_rm1_rm2) [4]
//! ```
//!
//! Times and durations are rationals (`p/q` or integer). Start times must be
//! nonnegative; durations may be negative in the file so the validator can
//! report them as a validity violation rather than a parse failure.

use crate::planning::{Plan, PlanStep, PlanningProblem};
use crate::rat::Rat;

/// Failure to read a plan file, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanTextError {
    #[error("line {line}: expected `<t>: (<action>) [<d>]`, {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: invalid rational `{text}`")]
    BadRational { line: usize, text: String },
    #[error("line {line}: start time {time} is negative")]
    NegativeStart { line: usize, time: Rat },
    #[error("line {line}: unknown action `{name}`")]
    UnknownAction { line: usize, name: String },
}

impl PlanTextError {
    /// Whether the failure is a reference to a missing action, as opposed to
    /// malformed text. Callers report the two differently.
    pub fn is_resolution(&self) -> bool {
        matches!(self, PlanTextError::UnknownAction { .. })
    }
}

/// Parses a plan file, resolving action names against `problem`.
pub fn parse_plan(problem: &PlanningProblem, text: &str) -> Result<Plan, PlanTextError> {
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let syntax = |reason: &str| PlanTextError::Syntax {
            line,
            reason: reason.to_string(),
        };
        let (time_text, rest) = trimmed
            .split_once(':')
            .ok_or_else(|| syntax("missing `:`"))?;
        let start: Rat = time_text
            .trim()
            .parse()
            .map_err(|_| PlanTextError::BadRational {
                line,
                text: time_text.trim().to_string(),
            })?;
        if start.is_negative() {
            return Err(PlanTextError::NegativeStart { line, time: start });
        }

        let rest = rest.trim();
        let open = rest.find('(').ok_or_else(|| syntax("missing `(`"))?;
        if !rest[..open].trim().is_empty() {
            return Err(syntax("unexpected text before `(`"));
        }
        let close = rest.rfind(')').ok_or_else(|| syntax("missing `)`"))?;
        let name = rest[open + 1..close].trim();
        if name.is_empty() {
            return Err(syntax("empty action name"));
        }

        let tail = rest[close + 1..].trim();
        let duration_text = tail
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| syntax("missing `[<d>]`"))?
            .trim();
        let duration: Rat = duration_text
            .parse()
            .map_err(|_| PlanTextError::BadRational {
                line,
                text: duration_text.to_string(),
            })?;

        let action = problem
            .action_index(name)
            .ok_or_else(|| PlanTextError::UnknownAction {
                line,
                name: name.to_string(),
            })?;
        steps.push(PlanStep {
            action,
            start,
            duration,
        });
    }
    Ok(Plan { steps })
}

/// Renders a plan back into the text format.
pub fn render_plan(problem: &PlanningProblem, plan: &Plan) -> String {
    let mut out = String::new();
    for step in &plan.steps {
        out.push_str(&format!(
            "{}: ({}) [{}]\n",
            step.start, problem.actions[step.action].name, step.duration
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{prop_set, DurationBound, DurativeAction, SnapAction};

    fn problem() -> PlanningProblem {
        let mk = |name: &str| DurativeAction {
            name: name.to_string(),
            start: SnapAction::default(),
            over_all: Default::default(),
            end: SnapAction::default(),
            lower: DurationBound {
                value: Rat::zero(),
                strict: false,
            },
            upper: DurationBound {
                value: Rat::from_int(9),
                strict: false,
            },
        };
        PlanningProblem {
            props: vec!["p".into()],
            actions: vec![mk("open_door_rb2_d_rm1"), mk("move_rb1_d_rm1_rm2")],
            init: prop_set(["p"]),
            goal: Default::default(),
        }
    }

    #[test]
    fn parses_steps_comments_and_blanks() {
        let text = "# header\n\n2: (open_door_rb2_d_rm1) [3]\n  5/2: (move_rb1_d_rm1_rm2) [1/2]\n";
        let plan = parse_plan(&problem(), text).unwrap();
        assert_eq!(plan.steps.len(), 2);
        assert_eq!(plan.steps[0].action, 0);
        assert_eq!(plan.steps[0].start, Rat::from_int(2));
        assert_eq!(plan.steps[0].duration, Rat::from_int(3));
        assert_eq!(plan.steps[1].start, Rat::new(5, 2));
        assert_eq!(plan.steps[1].duration, Rat::new(1, 2));
    }

    #[test]
    fn round_trips_through_render() {
        let text = "2: (open_door_rb2_d_rm1) [3]\n0: (move_rb1_d_rm1_rm2) [5/2]\n";
        let problem = problem();
        let plan = parse_plan(&problem, text).unwrap();
        assert_eq!(render_plan(&problem, &plan), text);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_plan(&problem(), "# ok\n2 (open_door_rb2_d_rm1) [3]").unwrap_err();
        assert!(matches!(err, PlanTextError::Syntax { line: 2, .. }));

        let err = parse_plan(&problem(), "x: (open_door_rb2_d_rm1) [3]").unwrap_err();
        assert!(matches!(err, PlanTextError::BadRational { line: 1, .. }));

        let err = parse_plan(&problem(), "-1: (open_door_rb2_d_rm1) [3]").unwrap_err();
        assert!(matches!(err, PlanTextError::NegativeStart { line: 1, .. }));
    }

    #[test]
    fn unknown_action_is_a_resolution_error() {
        let err = parse_plan(&problem(), "0: (teleport) [1]").unwrap_err();
        assert!(err.is_resolution());
        assert!(
            matches!(err, PlanTextError::UnknownAction { line: 1, ref name } if name == "teleport")
        );
    }

    #[test]
    fn negative_durations_parse_for_the_validator_to_judge() {
        let plan = parse_plan(&problem(), "0: (open_door_rb2_d_rm1) [-2]").unwrap();
        assert_eq!(plan.steps[0].duration, Rat::from_int(-2));
    }
}
