//! Command-line front end for the taplan library.
//!
//! Subcommands: `validate` a plan against a problem, `encode` a problem into
//! a network of timed automata, `witness` a valid plan as an accepting run,
//! `check-run` a recorded run against a network file, and `explore` the
//! network for an accepting run by bounded search.
//!
//! Exit codes: 0 success/valid, 1 invalid plan or rejected run, 2 no
//! accepting run within the explorer budget, 64 unreadable or malformed
//! input, 65 semantic resolution failure (unknown names, inconsistent
//! problem declarations).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use taplan::encode::{
    encode, export_network, import_network, symbols_json, EncodeOptions, EncodedNetwork,
    ExportFormat,
};
use taplan::explore::{
    bounded_reach_with, default_delay_grid, ExploreOptions, SearchBudget, SearchOutcome,
};
use taplan::planning::{parse_plan, validate_plan, Plan, PlanningProblem};
use taplan::rat::Rat;
use taplan::ta::{run_check, Run};
use taplan::witness::{build_witness, timeline, WitnessError};

const EXIT_INVALID: u8 = 1;
const EXIT_NOT_FOUND: u8 = 2;
const EXIT_PARSE: u8 = 64;
const EXIT_RESOLUTION: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "taplan",
    version,
    about = "Validate temporal plans, encode planning problems as timed automata, and build checkable accepting runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Network plus symbol tables; round-trips through `check-run`.
    Internal,
    /// Flattened text rendering for external checkers.
    CheckerCompat,
}

#[derive(Subcommand)]
enum Command {
    /// Check a plan against a problem and report every violated clause.
    Validate {
        /// Problem description (JSON).
        #[arg(long)]
        problem: PathBuf,
        /// Plan file, one `<time>: (<action>) [<duration>]` step per line.
        #[arg(long)]
        plan: PathBuf,
        /// Separation margin for mutually exclusive snap actions (`p` or `p/q`).
        #[arg(long, default_value = "0")]
        epsilon: String,
    },
    /// Compile a problem into a network of timed automata.
    Encode {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Output layout.
        #[arg(long, value_enum, default_value_t = FormatArg::Internal)]
        format: FormatArg,
        /// Guard the end transition with the start snap's interference set,
        /// reproducing the source text literally instead of the corrected
        /// end-snap guard.
        #[arg(long)]
        strict_paper_ee_guard: bool,
        /// Network file to write; a `.symbols.json` side-car is written too.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an accepting run from a valid plan and write the replayable trace.
    Witness {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Run trace file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write the encoded network here (internal format).
        #[arg(long)]
        net_out: Option<PathBuf>,
    },
    /// Replay a recorded run against a network file.
    CheckRun {
        /// Network file in the internal format.
        #[arg(long)]
        network: PathBuf,
        /// Run trace file.
        #[arg(long)]
        run: PathBuf,
    },
    /// Search the encoded network for an accepting run within a budget.
    Explore {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Maximum internal steps along any explored path.
        #[arg(long, default_value_t = 12)]
        max_steps: usize,
        /// Maximum number of configurations to explore.
        #[arg(long, default_value_t = 200_000)]
        max_configs: usize,
        /// Comma-separated delay amounts; defaults to the guard constants.
        #[arg(long)]
        grid: Option<String>,
        /// Seed for successor-order shuffling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for frontier expansion.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Where to write the found run trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A command failure: exit code plus the message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful output, not errors.
            return if e.use_stderr() {
                let _ = e.print();
                ExitCode::from(EXIT_PARSE)
            } else {
                let _ = e.print();
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate {
            problem,
            plan,
            epsilon,
        } => {
            let problem = load_problem(&problem)?;
            let epsilon = parse_epsilon(&epsilon)?;
            let plan = load_plan(&problem, &plan)?;
            cmd_validate(&problem, &plan, &epsilon)
        }
        Command::Encode {
            problem,
            epsilon,
            format,
            strict_paper_ee_guard,
            out,
        } => {
            let problem = load_problem(&problem)?;
            let options = EncodeOptions {
                epsilon: parse_epsilon(&epsilon)?,
                strict_paper_ee_guard,
                ..Default::default()
            };
            let enc = encode(&problem, &options);
            let format = match format {
                FormatArg::Internal => ExportFormat::Internal,
                FormatArg::CheckerCompat => ExportFormat::CheckerCompat,
            };
            write_out(&out, &export_network(&enc, format))?;
            println!("wrote network to {}", out.display());
            let symbols_path = out.with_extension("symbols.json");
            write_out(&symbols_path, &symbols_json(&enc))?;
            println!("wrote symbols to {}", symbols_path.display());
            Ok(0)
        }
        Command::Witness {
            problem,
            plan,
            epsilon,
            out,
            net_out,
        } => {
            let problem = load_problem(&problem)?;
            let epsilon = parse_epsilon(&epsilon)?;
            let plan = load_plan(&problem, &plan)?;
            cmd_witness(&problem, &plan, &epsilon, &out, net_out.as_deref())
        }
        Command::CheckRun { network, run } => {
            let text = read_input(&network)?;
            let enc = import_network(&text)
                .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", network.display())))?;
            let text = read_input(&run)?;
            let run: Run = serde_json::from_str(&text)
                .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", run.display())))?;
            cmd_check_run(&enc, &run)
        }
        Command::Explore {
            problem,
            epsilon,
            max_steps,
            max_configs,
            grid,
            seed,
            workers,
            out,
        } => {
            let problem = load_problem(&problem)?;
            let options = EncodeOptions::with_epsilon(parse_epsilon(&epsilon)?);
            let enc = encode(&problem, &options);
            let delay_grid = match grid {
                Some(text) => parse_grid(&text)?,
                None => default_delay_grid(&enc.network),
            };
            let budget = SearchBudget {
                max_internal_steps: max_steps,
                delay_grid,
                max_configs,
            };
            let explore_options = ExploreOptions {
                workers: workers.max(1),
                seed: Some(seed),
            };
            cmd_explore(&enc, &budget, &explore_options, out.as_deref())
        }
    }
}

fn cmd_validate(problem: &PlanningProblem, plan: &Plan, epsilon: &Rat) -> Result<u8, Failure> {
    let verdict = validate_plan(problem, plan, epsilon)
        .map_err(|e| Failure::new(EXIT_RESOLUTION, e.to_string()))?;
    if verdict.is_valid() {
        println!("Valid");
        if !verdict.no_self_overlap {
            println!("note: the plan overlaps two executions of the same action");
        }
        Ok(0)
    } else {
        println!("Invalid");
        for violation in &verdict.violations {
            println!("{violation}");
        }
        Ok(EXIT_INVALID)
    }
}

fn cmd_witness(
    problem: &PlanningProblem,
    plan: &Plan,
    epsilon: &Rat,
    out: &Path,
    net_out: Option<&Path>,
) -> Result<u8, Failure> {
    let enc = encode(problem, &EncodeOptions::with_epsilon(epsilon.clone()));
    let run = build_witness(&enc, problem, plan, epsilon).map_err(|e| match e {
        WitnessError::InvalidPlan { .. } | WitnessError::SelfOverlap { .. } => {
            Failure::new(EXIT_INVALID, e.to_string())
        }
        WitnessError::Resolution(_) => Failure::new(EXIT_RESOLUTION, e.to_string()),
        other => Failure::new(
            EXIT_INTERNAL,
            format!("witness construction failed: {other}"),
        ),
    })?;
    // The exit status promises a replayable, accepting run; verify the
    // artifact rather than trusting the builder.
    if !run_check(&enc.network, &run) || !enc.accepting(run.last_configuration()) {
        return Err(Failure::new(
            EXIT_INTERNAL,
            "constructed run failed its own replay check",
        ));
    }
    write_out(out, &run_json(&run))?;
    if let Some(path) = net_out {
        write_out(path, &export_network(&enc, ExportFormat::Internal))?;
    }
    print!("{}", timeline(&enc, &run));
    println!("wrote run to {}", out.display());
    Ok(0)
}

fn cmd_check_run(enc: &EncodedNetwork, run: &Run) -> Result<u8, Failure> {
    if run.initial != enc.initial_configuration() {
        println!("rejected: the run does not start in the initial configuration");
        return Ok(EXIT_INVALID);
    }
    match run.replay(&enc.network) {
        Ok(()) => {
            let goal = enc.accepting(run.last_configuration());
            println!("replayed {} steps", run.steps.len());
            println!("reaches goal_M: {}", if goal { "yes" } else { "no" });
            Ok(0)
        }
        Err(divergence) => {
            println!("rejected: {divergence}");
            Ok(EXIT_INVALID)
        }
    }
}

fn cmd_explore(
    enc: &EncodedNetwork,
    budget: &SearchBudget,
    options: &ExploreOptions,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    match bounded_reach_with(enc, budget, options) {
        SearchOutcome::Found(run) => {
            println!("found accepting run with {} steps", run.steps.len());
            if let Some(path) = out {
                write_out(path, &run_json(&run))?;
                println!("wrote run to {}", path.display());
            }
            Ok(0)
        }
        SearchOutcome::NotFound(not_found) => {
            println!("{not_found}");
            Ok(EXIT_NOT_FOUND)
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<PlanningProblem, Failure> {
    let text = read_input(path)?;
    let problem: PlanningProblem = serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    problem
        .check()
        .map_err(|e| Failure::new(EXIT_RESOLUTION, format!("{}: {e}", path.display())))?;
    Ok(problem)
}

fn load_plan(problem: &PlanningProblem, path: &Path) -> Result<Plan, Failure> {
    let text = read_input(path)?;
    parse_plan(problem, &text).map_err(|e| {
        let code = if e.is_resolution() {
            EXIT_RESOLUTION
        } else {
            EXIT_PARSE
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn parse_epsilon(text: &str) -> Result<Rat, Failure> {
    let epsilon = Rat::from_str(text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("invalid epsilon `{text}`: {e}")))?;
    if epsilon.is_negative() {
        return Err(Failure::new(
            EXIT_PARSE,
            format!("invalid epsilon `{text}`: must be nonnegative"),
        ));
    }
    Ok(epsilon)
}

fn parse_grid(text: &str) -> Result<Vec<Rat>, Failure> {
    let mut grid = Vec::new();
    for part in text.split(',') {
        let value = Rat::from_str(part)
            .map_err(|e| Failure::new(EXIT_PARSE, format!("invalid grid value `{part}`: {e}")))?;
        if value.is_negative() {
            return Err(Failure::new(
                EXIT_PARSE,
                format!("invalid grid value `{part}`: delays are nonnegative"),
            ));
        }
        grid.push(value);
    }
    Ok(grid)
}

fn run_json(run: &Run) -> String {
    let mut text = serde_json::to_string_pretty(run).expect("run serialize");
    text.push('\n');
    text
}

fn write_out(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot write {}: {e}", path.display())))
}
