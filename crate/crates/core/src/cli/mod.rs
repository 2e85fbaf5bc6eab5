//! Command implementations behind the `synteam` binary.
//!
//! Every command returns its JSON output as a string together with an exit
//! code, so the binary only parses arguments and prints.
//!
//! Exit codes: 0 success, 2 validation error, 3 infeasible, 4 internal
//! invariant breach.

pub mod derive;
pub mod formats;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::congeniality::{CongenialityParams, DEFAULT_GAMMA};
use crate::error::{Error, Violation};
use crate::model::{Roster, Task};
use crate::partition::{
    bernoulli_nash, quantity_distribution, score_partition, validate_partition, ScoredPartition,
};
use crate::ranking::{kendall_tau_partial, ranking_from_scores, PartialRanking, DEFAULT_DIGITS, DEFAULT_TIE_PENALTY};
use crate::synteam::{
    brute_force_optimum, optimize, AnnealConfig, AnnealTrace, DEFAULT_ACCEPTANCE_SCALE, DEFAULT_COOLING_RATE,
    DEFAULT_HEAT, EXHAUSTIVE_LIMIT,
};
use self::derive::{derive_competences, IntelligenceMatrix};
use self::formats::{AgentRecord, RosterFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "synteam", version, about = "Compose size-constrained synergistic teams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition a roster into teams for a task
    Compose(ComposeArgs),
    /// Score a given partition without optimising
    Score(ScoreArgs),
    /// Kendall distance between two score files, with ties
    RankCompare(RankArgs),
    /// Turn subject marks into a roster with intelligence competences
    Derive(DeriveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ComposeArgs {
    pub roster: PathBuf,
    pub task: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_HEAT)]
    pub heat: f64,
    #[arg(long, default_value_t = DEFAULT_COOLING_RATE)]
    pub cooling_rate: f64,
    #[arg(long, default_value_t = DEFAULT_ACCEPTANCE_SCALE)]
    pub acceptance_scale: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Search every partition instead of annealing (at most 12 agents)
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    pub roster: PathBuf,
    pub task: PathBuf,
    /// Partition file, or a report from `compose`
    pub partition: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    pub scores_a: PathBuf,
    pub scores_b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIGITS)]
    pub digits: u32,
    #[arg(long, default_value_t = DEFAULT_TIE_PENALTY)]
    pub tie_penalty: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DeriveArgs {
    pub marks: PathBuf,
    /// 10x8 subject-by-intelligence matrix; defaults to the built-in one
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: message plus exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Validation(_) | Error::TooLarge { .. } => EXIT_VALIDATION,
            Error::InfeasibleAssignment { .. } | Error::NoPartition { .. } => EXIT_INFEASIBLE,
            Error::Contract(_) => EXIT_INTERNAL,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CommandResult = std::result::Result<String, Failure>;

/// Rounds to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_VALIDATION,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn to_json<T: Serialize>(value: &T) -> CommandResult {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::internal(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub agents: usize,
    pub team_size: usize,
    pub lambda: f64,
    pub mu: f64,
    pub upsilon: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooling_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionOut {
    pub teams: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TeamOut {
    pub members: Vec<String>,
    pub assignment: BTreeMap<String, Vec<String>>,
    pub proficiency: f64,
    pub congeniality: f64,
    pub value: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceOut {
    pub iterations: usize,
    pub improvements: usize,
    pub accepted_worse: usize,
    pub rejected: usize,
    pub clamp_events: usize,
    pub best_value_first: f64,
    pub best_value_last: f64,
}

impl TraceOut {
    fn from_trace(t: &AnnealTrace, initial: f64) -> Self {
        Self {
            iterations: t.iterations,
            improvements: t.improvements,
            accepted_worse: t.accepted_worse,
            rejected: t.rejected,
            clamp_events: t.clamp_events,
            best_value_first: sig6(t.best_values.first().copied().unwrap_or(initial)),
            best_value_last: sig6(t.best_values.last().copied().unwrap_or(initial)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_clock_ms: f64,
}

/// Machine-readable result of `compose` and `score`. Reals carry 6
/// significant digits; `timing` is the only non-deterministic field.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub config: ConfigEcho,
    pub partition: PartitionOut,
    pub teams: Vec<TeamOut>,
    pub product_value: f64,
    pub objective_value: f64,
    pub clamped_teams: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceOut>,
    pub timing: Timing,
}

impl RunReport {
    fn new(command: &'static str, config: ConfigEcho, sp: &ScoredPartition, trace: Option<TraceOut>, started: Instant) -> Self {
        Self {
            command,
            config,
            partition: PartitionOut {
                teams: sp.partition.teams.iter().map(|t| t.members().to_vec()).collect(),
            },
            teams: sp
                .teams
                .iter()
                .map(|t| TeamOut {
                    members: t.team.members().to_vec(),
                    assignment: t
                        .assignment
                        .by_agent
                        .iter()
                        .map(|(a, cs)| (a.clone(), cs.iter().cloned().collect()))
                        .collect(),
                    proficiency: sig6(t.proficiency),
                    congeniality: sig6(t.congeniality),
                    value: sig6(t.value),
                    clamped: t.clamped(),
                })
                .collect(),
            product_value: sig6(sp.product_value),
            objective_value: sig6(sp.objective_value),
            clamped_teams: sp.clamped_teams,
            trace,
            timing: Timing {
                wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
            },
        }
    }
}

fn params(gamma: f64) -> std::result::Result<CongenialityParams, Failure> {
    CongenialityParams::new(gamma).map_err(Failure::from)
}

fn echo(roster: &Roster, task: &Task, gamma: f64) -> ConfigEcho {
    ConfigEcho {
        agents: roster.len(),
        team_size: task.team_size,
        lambda: task.task_type.lambda,
        mu: task.task_type.mu,
        upsilon: task.task_type.upsilon,
        gamma,
        seed: None,
        heat: None,
        cooling_rate: None,
        acceptance_scale: None,
        oracle: None,
    }
}

/// Re-checks a result before it is reported.
fn verify(sp: &ScoredPartition, roster: &Roster, task: &Task, params: CongenialityParams) -> std::result::Result<(), Failure> {
    let violations = validate_partition(&sp.partition, roster, task.team_size);
    if !violations.is_empty() {
        return Err(Failure::internal(format!(
            "result breaks partition invariants: {}",
            violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
        )));
    }
    let product = bernoulli_nash(&sp.team_values());
    if (product - sp.product_value).abs() > 1e-9 * product.abs().max(1e-300) {
        return Err(Failure::internal("product value does not match team values"));
    }
    let rescored = score_partition(&sp.partition, roster, &task.task_type, params)?;
    if rescored.team_values() != sp.team_values() {
        return Err(Failure::internal("re-scoring the result changed team values"));
    }
    Ok(())
}

fn emit(text: String, out: Option<&Path>) -> CommandResult {
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure {
                code: EXIT_VALIDATION,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

pub fn compose(args: &ComposeArgs) -> CommandResult {
    let started = Instant::now();
    let roster = formats::load_roster(&read(&args.roster)?)?;
    let task = formats::load_task(&read(&args.task)?)?;
    let params = params(args.gamma)?;
    let cfg = AnnealConfig {
        initial_heat: args.heat,
        cooling_rate: args.cooling_rate,
        rng_seed: args.seed,
        acceptance_scale: args.acceptance_scale,
    };
    let v = cfg.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v).into());
    }
    if quantity_distribution(roster.len(), task.team_size).is_sentinel() {
        return Err(Error::NoPartition { n: roster.len(), m: task.team_size }.into());
    }

    let (best, trace) = if args.oracle {
        if roster.len() > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge { n: roster.len(), limit: EXHAUSTIVE_LIMIT }.into());
        }
        (brute_force_optimum(&roster, &task, params)?.best, None)
    } else {
        let run = optimize(&roster, &task, params, &cfg)?;
        if run.trace.best_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Failure::internal("best-ever trace decreased"));
        }
        let trace = TraceOut::from_trace(&run.trace, run.best.objective_value);
        (run.best, Some(trace))
    };
    verify(&best, &roster, &task, params)?;

    let mut config = echo(&roster, &task, args.gamma);
    config.oracle = Some(args.oracle);
    if !args.oracle {
        config.seed = Some(args.seed);
        config.heat = Some(args.heat);
        config.cooling_rate = Some(args.cooling_rate);
        config.acceptance_scale = Some(args.acceptance_scale);
    }
    let report = RunReport::new("compose", config, &best, trace, started);
    emit(to_json(&report)?, args.out.as_deref())
}

pub fn score(args: &ScoreArgs) -> CommandResult {
    let started = Instant::now();
    let roster = formats::load_roster(&read(&args.roster)?)?;
    let task = formats::load_task(&read(&args.task)?)?;
    let partition = formats::load_partition(&read(&args.partition)?)?;
    let params = params(args.gamma)?;
    let violations = validate_partition(&partition, &roster, task.team_size);
    if !violations.is_empty() {
        return Err(Error::Validation(violations).into());
    }
    let sp = score_partition(&partition, &roster, &task.task_type, params)?;
    verify(&sp, &roster, &task, params)?;
    let report = RunReport::new("score", echo(&roster, &task, args.gamma), &sp, None, started);
    emit(to_json(&report)?, args.out.as_deref())
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub distance: f64,
    pub digits: u32,
    pub tie_penalty: f64,
    pub ranking_a: PartialRanking,
    pub ranking_b: PartialRanking,
}

pub fn rank_compare(args: &RankArgs) -> CommandResult {
    let a = formats::load_scores(&read(&args.scores_a)?)?;
    let b = formats::load_scores(&read(&args.scores_b)?)?;
    let ra = ranking_from_scores(&a, args.digits)?;
    let rb = ranking_from_scores(&b, args.digits)?;
    let distance = kendall_tau_partial(&ra, &rb, args.tie_penalty)?;
    let report = RankReport {
        distance: sig6(distance),
        digits: args.digits,
        tie_penalty: args.tie_penalty,
        ranking_a: ra,
        ranking_b: rb,
    };
    emit(to_json(&report)?, args.out.as_deref())
}

pub fn derive(args: &DeriveArgs) -> CommandResult {
    let marks = formats::load_marks(&read(&args.marks)?)?;
    let matrix = match &args.matrix {
        Some(path) => serde_json::from_str::<IntelligenceMatrix>(&read(path)?).map_err(|e| {
            Failure::from(Error::single("matrix", format!("line {}", e.line()), e.to_string()))
        })?,
        None => IntelligenceMatrix::default(),
    };
    let mut violations: Vec<Violation> = Vec::new();
    let mut agents = Vec::with_capacity(marks.students.len());
    for s in marks.students {
        match derive_competences(&s.marks, &matrix) {
            Ok(competences) => agents.push(AgentRecord {
                id: s.id,
                gender: s.gender,
                personality: s.personality,
                answers: s.answers,
                competences,
            }),
            Err(Error::Validation(v)) => violations.extend(v.into_iter().map(|v| Violation {
                subject: format!("{} {}", s.id, v.subject),
                ..v
            })),
            Err(e) => return Err(e.into()),
        }
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations).into());
    }
    let roster = RosterFile {
        competence_universe: None,
        keying: marks.keying,
        agents,
    };
    emit(to_json(&roster)?, args.out.as_deref())
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> CommandResult {
    match &cli.command {
        Command::Compose(a) => compose(a),
        Command::Score(a) => score(a),
        Command::RankCompare(a) => rank_compare(a),
        Command::Derive(a) => derive(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.123456789), 0.123457);
        assert_eq!(sig6(1234567.0), 1234570.0);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(0.955), 0.955);
    }

    #[test]
    fn failure_codes() {
        assert_eq!(Failure::from(Error::NoPartition { n: 3, m: 4 }).code, EXIT_INFEASIBLE);
        assert_eq!(Failure::from(Error::single("a", "b", "c")).code, EXIT_VALIDATION);
        assert_eq!(Failure::from(Error::contract("x")).code, EXIT_INTERNAL);
    }
}
