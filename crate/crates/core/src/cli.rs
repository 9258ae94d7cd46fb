//! Command-line front end. Every subcommand reads an instance document from
//! `--input` or standard input and prints one result document
//! `{"status", "payload", "diagnostics"}`. Exit codes: 0 ok, 1 none, 2 error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::document::{
    CoalitionDocument, DocumentError, ExternalPlanDocument, InstanceDocument, MatchingPlanDocument,
    PartitionDocument, RejectionDocument, ReportDocument,
};
use crate::equilibrium::{enumerate_cooperative_ne, is_cooperative_ne, EquilibriumError, Verdict};
use crate::hardness::{extract_partition, gen_from_partition, HardnessError, PartitionInstance};
use crate::interventions::{
    check_external, check_matching, oracle_external, oracle_matching, plan_external_traced,
    plan_matching_traced, Objective,
};
use crate::model::{Coalition, GameInstance, ModelError};
use crate::rational::format_rational;
use crate::solvers::{decide_balanced_traced, solve_low_ratio, SolverError};
use crate::subsets::MAX_SCAN_AGENTS;

#[derive(Parser, Debug)]
#[command(
    name = "pivotal",
    version,
    about = "Exact solver for pivotal participation games"
)]
struct Cli {
    /// Instance document; standard input when omitted
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Refuse exponential scans above this many agents
    #[arg(long, global = true, default_value_t = 25)]
    max_n: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check whether a coalition is a cooperative equilibrium
    CheckNe {
        /// Comma-separated 1-based agent positions
        #[arg(long, value_delimiter = ',', required = true)]
        coalition: Vec<usize>,
    },
    /// List every cooperative equilibrium
    EnumerateNe {
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Minimal coalition when every e_i/m_i is at most tau
    SolveLowRatio,
    /// Swap search for instances whose minimal coalitions share one size
    SolveBalanced {
        /// Check balancedness exhaustively first (at most 20 agents)
        #[arg(long)]
        verify_balanced: bool,
    },
    /// Approximate cheapest external investment
    PlanExternal,
    /// Approximate cheapest matching fund
    PlanMatching(ObjectiveArg),
    /// Exact cheapest external investment
    OracleExternal,
    /// Exact cheapest matching fund
    OracleMatching(ObjectiveArg),
    /// Check an intervention plan
    ValidatePlan {
        #[arg(long, value_enum)]
        kind: PlanKind,
        /// Plan document
        #[arg(long)]
        plan: PathBuf,
    },
    /// Build a game from PARTITION values ({"values": [...]})
    GenHardness,
    /// Map an equilibrium of a generated game back to value positions
    DecodeCertificate {
        #[arg(long, value_delimiter = ',', conflicts_with = "certificate")]
        coalition: Option<Vec<usize>>,
        /// Coalition document: a position list or an object with "coalition"
        #[arg(long, required_unless_present = "coalition")]
        certificate: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ObjectiveArg {
    #[arg(long, value_enum, default_value_t = ObjectiveChoice::Cost)]
    objective: ObjectiveChoice,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ObjectiveChoice {
    Cost,
    Rate,
}

impl From<ObjectiveChoice> for Objective {
    fn from(choice: ObjectiveChoice) -> Self {
        match choice {
            ObjectiveChoice::Cost => Objective::Cost,
            ObjectiveChoice::Rate => Objective::Rate,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PlanKind {
    External,
    Matching,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    None,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::None => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub status: Status,
    pub payload: Value,
    pub diagnostics: Vec<String>,
}

impl CommandResult {
    fn ok(payload: impl Serialize) -> Self {
        Self::with(Status::Ok, payload)
    }

    fn none(payload: impl Serialize) -> Self {
        Self::with(Status::None, payload)
    }

    fn with(status: Status, payload: impl Serialize) -> Self {
        Self {
            status,
            payload: serde_json::to_value(payload).expect("payloads serialize"),
            diagnostics: Vec::new(),
        }
    }

    fn error(message: String) -> Self {
        Self {
            status: Status::Error,
            payload: Value::Null,
            diagnostics: vec![message],
        }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.diagnostics.push(line.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("results serialize");
        text.push('\n');
        text
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
    #[error("{n} agents exceed --max-n {max}")]
    TooManyAgents { n: usize, max: usize },
}

/// Parses `args` (program name first) and runs the subcommand; `stdin` is
/// read only when `--input` is absent.
pub fn dispatch<I, T>(args: I, stdin: &mut dyn Read) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdin).unwrap_or_else(|e| CommandResult::error(e.to_string())),
        Err(e) => CommandResult::error(e.to_string().trim_end().to_string()),
    }
}

/// Process entry point: ok/none results go to `out`, errors to `err`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<T> = args.into_iter().collect();
    if let Err(e) = Cli::try_parse_from(args.clone()) {
        if !e.use_stderr() {
            let _ = write!(out, "{e}");
            return 0;
        }
    }
    let result = dispatch(args, stdin);
    let rendered = result.render();
    let _ = if result.status == Status::Error {
        err.write_all(rendered.as_bytes())
    } else {
        out.write_all(rendered.as_bytes())
    };
    result.exit_code()
}

fn read_source(path: Option<&Path>, stdin: &mut dyn Read) -> Result<String, CliError> {
    let mut text = String::new();
    match path {
        Some(path) => {
            text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.display().to_string(),
                source,
            })?;
        }
        None => {
            stdin
                .read_to_string(&mut text)
                .map_err(|source| CliError::Read {
                    path: "standard input".into(),
                    source,
                })?;
        }
    }
    Ok(text)
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Document(e.into()))
}

fn guard(game: &GameInstance, max_n: usize) -> Result<(), CliError> {
    let max = max_n.min(MAX_SCAN_AGENTS);
    if game.len() > max {
        return Err(CliError::TooManyAgents { n: game.len(), max });
    }
    Ok(())
}

fn list(positions: &[usize]) -> String {
    positions
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<CommandResult, CliError> {
    let text = read_source(cli.input.as_deref(), stdin)?;
    if let Command::GenHardness = cli.command {
        let doc: PartitionDocument = parse_json(&text)?;
        let art = gen_from_partition(&PartitionInstance::new(&doc.values)?);
        return Ok(
            CommandResult::ok(InstanceDocument::from_artifact(&art)).note(format!(
                "{} value agents plus two anchors; tau = {}",
                2 * art.meta.t,
                format_rational(&art.meta.tau)
            )),
        );
    }
    let instance: InstanceDocument = parse_json(&text)?;
    let game = instance.to_game()?;

    let result = match &cli.command {
        Command::CheckNe { coalition } => {
            let s = Coalition::from_positions(&game, coalition)?;
            match is_cooperative_ne(&game, &s)? {
                Verdict::Accepted(report) => {
                    CommandResult::ok(ReportDocument::from_report(&report))
                }
                Verdict::Rejected(rejection) => CommandResult::none(json!({
                    "coalition": s.positions(),
                    "rejection": RejectionDocument::from_rejection(&rejection),
                }))
                .note(format!("{} side violated: {rejection}", rejection.side)),
            }
        }
        Command::EnumerateNe { limit } => {
            guard(&game, cli.max_n)?;
            let found = enumerate_cooperative_ne(&game, *limit);
            let coalitions: Vec<Vec<usize>> = found.iter().map(Coalition::positions).collect();
            let payload = json!({ "count": coalitions.len(), "coalitions": coalitions });
            let mut result = if found.is_empty() {
                CommandResult::none(payload)
            } else {
                CommandResult::ok(payload)
            };
            if limit.is_some_and(|l| found.len() == l) {
                result = result.note(format!("stopped at --limit {}", found.len()));
            }
            result
        }
        Command::SolveLowRatio => match solve_low_ratio(&game)? {
            Some(s) => coalition_result(&game, &s)?,
            None => CommandResult::none(Value::Null).note(format!(
                "total endowment {} is below tau = {}",
                game.total_endowment(),
                game.tau()
            )),
        },
        Command::SolveBalanced { verify_balanced } => {
            let run = decide_balanced_traced(&game, *verify_balanced)?;
            let mut result = match &run.coalition {
                Some(s) => coalition_result(&game, s)?,
                None => CommandResult::none(Value::Null)
                    .note("replacement pool exhausted before every member met its lower bound"),
            };
            result = result.note(format!("minimal coalition size {}", run.minimal_size));
            for agent in &run.removed {
                result = result.note(format!("swapped out agent {}", agent + 1));
            }
            result
        }
        Command::PlanExternal => {
            let search = plan_external_traced(&game);
            let mut result = CommandResult::ok(ExternalPlanDocument::from_plan(&search.plan));
            for (pos, c) in search.candidates.iter().enumerate() {
                result = result.note(format!(
                    "level {} (agent {}): admitted [{}], delta {}{}",
                    c.level,
                    c.level_agent + 1,
                    list(&c.admitted.iter().map(|i| i + 1).collect::<Vec<_>>()),
                    c.plan.delta,
                    if search.chosen == Some(pos) {
                        ", chosen"
                    } else {
                        ""
                    }
                ));
            }
            if search.chosen.is_none() {
                result = result.note(format!(
                    "fallback: nobody contributes, delta = tau = {}",
                    game.tau()
                ));
            }
            result
        }
        Command::PlanMatching(arg) => {
            let search = plan_matching_traced(&game, arg.objective.into());
            let mut result = match &search.plan {
                Some(plan) => CommandResult::ok(MatchingPlanDocument::from_plan(plan)),
                None => CommandResult::none(Value::Null),
            };
            for (pos, c) in search.candidates.iter().enumerate() {
                result = result.note(format!(
                    "level {} (agent {}): admitted [{}], rate {}, cost {}{}",
                    c.level,
                    c.level_agent + 1,
                    list(&c.admitted.iter().map(|i| i + 1).collect::<Vec<_>>()),
                    c.plan.rate,
                    c.plan.cost(),
                    if search.chosen == Some(pos) {
                        ", chosen"
                    } else {
                        ""
                    }
                ));
            }
            if search.plan.is_none() {
                result = result.note("no candidate rate is below the budget cap");
            }
            result
        }
        Command::OracleExternal => {
            guard(&game, cli.max_n)?;
            CommandResult::ok(ExternalPlanDocument::from_plan(&oracle_external(&game)))
        }
        Command::OracleMatching(arg) => {
            guard(&game, cli.max_n)?;
            match oracle_matching(&game, arg.objective.into()) {
                Some(plan) => CommandResult::ok(MatchingPlanDocument::from_plan(&plan)),
                None => CommandResult::none(Value::Null)
                    .note("no coalition can be matched within the budget cap"),
            }
        }
        Command::ValidatePlan { kind, plan } => {
            let text = read_source(Some(plan), stdin)?;
            let verdict = match kind {
                PlanKind::External => {
                    let doc: ExternalPlanDocument = parse_json(&text)?;
                    check_external(&game, &doc.to_plan(&game)?)
                }
                PlanKind::Matching => {
                    let doc: MatchingPlanDocument = parse_json(&text)?;
                    check_matching(&game, &doc.to_plan(&game)?)
                }
            };
            match verdict {
                Ok(()) => CommandResult::ok(json!({ "valid": true })),
                Err(violation) => {
                    CommandResult::none(json!({ "valid": false })).note(violation.to_string())
                }
            }
        }
        Command::DecodeCertificate {
            coalition,
            certificate,
        } => {
            let art = instance.to_artifact()?;
            let positions = match (coalition, certificate) {
                (Some(positions), _) => positions.clone(),
                (None, Some(path)) => {
                    let doc: CoalitionDocument = parse_json(&read_source(Some(path), stdin)?)?;
                    doc.positions().to_vec()
                }
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let s = Coalition::from_positions(&art.game, &positions)?;
            let indices = extract_partition(&art, &s)?;
            // c = (e - N - M) / 2 for each value agent.
            let mut values: Vec<(usize, num_bigint::BigInt)> = Vec::new();
            for &i in s.members().iter().filter(|&&i| i < 2 * art.meta.t) {
                let e = art.game.endowment(i).to_integer();
                values.push((art.meta.positions[i], (e - &art.meta.n - &art.meta.m) / 2));
            }
            values.sort();
            let sum: num_bigint::BigInt = values.iter().map(|(_, c)| c).sum();
            CommandResult::ok(json!({
                "indices": indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "values": values.iter().map(|(_, c)| c.to_string()).collect::<Vec<_>>(),
                "sum": sum.to_string(),
            }))
        }
        Command::GenHardness => unreachable!("handled above"),
    };
    Ok(result)
}

fn coalition_result(game: &GameInstance, s: &Coalition) -> Result<CommandResult, CliError> {
    Ok(match is_cooperative_ne(game, s)? {
        Verdict::Accepted(report) => CommandResult::ok(json!({
            "coalition": s.positions(),
            "report": ReportDocument::from_report(&report),
        })),
        // Only reachable on unbalanced input without --verify-balanced.
        Verdict::Rejected(rejection) => CommandResult::none(json!({
            "coalition": s.positions(),
            "rejection": RejectionDocument::from_rejection(&rejection),
        }))
        .note(format!(
            "returned coalition is not an equilibrium: {rejection}"
        )),
    })
}
