use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data breaks a documented invariant.
    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    /// A team cannot cover the task: every member needs at least one request.
    #[error(
        "infeasible assignment for team [{}]: {agents} agents but only {requests} competence requests",
        .team.join(", ")
    )]
    InfeasibleAssignment {
        team: Vec<String>,
        agents: usize,
        requests: usize,
    },

    /// No partition constrained by size `m` exists for `n` agents.
    #[error("no valid team partition for n={n} agents with team size m={m}")]
    NoPartition { n: usize, m: usize },

    #[error("instance too large for exhaustive search: n={n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },

    /// Caller passed arguments outside an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn single(subject: impl Into<String>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation(vec![Violation::new(subject, field, message)])
    }
}

/// One broken invariant, located by subject (agent id, team, `task`, ...) and field.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub subject: String,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(subject: impl Into<String>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}: {}", self.subject, self.field, self.message)
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
