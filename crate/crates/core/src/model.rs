//! Domain types: personality profiles, agents, task types, tasks and teams.
//!
//! Everything here is immutable once built. Construction is permissive; the
//! `validate_*` functions report every broken invariant as data so ingestion
//! can show all problems at once.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Tolerance on the sum of request weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Questions per personality dimension in the questionnaire.
pub const QUESTIONS_PER_DIMENSION: usize = 5;
/// Total number of questionnaire answers.
pub const QUESTIONNAIRE_LEN: usize = 4 * QUESTIONS_PER_DIMENSION;

/// Four personality traits, each in `[-1, 1]`.
///
/// Positive `sn` leans intuitive, positive `tf` thinking, positive `ei`
/// extrovert and positive `pj` perceiving; the negative half of each axis is
/// the opposite pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonalityProfile {
    pub sn: f64,
    pub tf: f64,
    pub ei: f64,
    pub pj: f64,
}

impl PersonalityProfile {
    pub const NEUTRAL: Self = Self { sn: 0.0, tf: 0.0, ei: 0.0, pj: 0.0 };

    pub fn new(sn: f64, tf: f64, ei: f64, pj: f64) -> Result<Self> {
        let p = Self { sn, tf, ei, pj };
        let violations = p.violations("personality");
        if violations.is_empty() {
            Ok(p)
        } else {
            Err(Error::Validation(violations))
        }
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Components in `(sn, tf, ei, pj)` order.
    pub fn as_array(&self) -> [f64; 4] {
        [self.sn, self.tf, self.ei, self.pj]
    }

    fn violations(&self, subject: &str) -> Vec<Violation> {
        ["sn", "tf", "ei", "pj"]
            .iter()
            .zip(self.as_array())
            .filter(|(_, v)| !(-1.0..=1.0).contains(v))
            .map(|(name, v)| {
                Violation::new(subject, format!("personality.{name}"), format!("{v} outside [-1, 1]"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Man,
    Woman,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "man" => Some(Gender::Man),
            "woman" => Some(Gender::Woman),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Man => "man",
            Gender::Woman => "woman",
        }
    }
}

/// One roster row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: String,
    pub gender: Gender,
    pub personality: PersonalityProfile,
    /// Competence id to level in `[0, 1]`. Missing competences have level 0.
    pub competences: BTreeMap<String, f64>,
}

impl AgentProfile {
    pub fn new(
        id: impl Into<String>,
        gender: Gender,
        personality: PersonalityProfile,
        competences: impl IntoIterator<Item = (String, f64)>,
    ) -> Self {
        Self {
            id: id.into(),
            gender,
            personality,
            competences: competences.into_iter().collect(),
        }
    }

    /// Level of `competence`, zero when the agent does not list it.
    pub fn level(&self, competence: &str) -> f64 {
        self.competences.get(competence).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roster {
    pub agents: Vec<AgentProfile>,
    pub competence_universe: BTreeSet<String>,
}

impl Roster {
    pub fn new(agents: Vec<AgentProfile>, competence_universe: BTreeSet<String>) -> Self {
        Self { agents, competence_universe }
    }

    /// Roster whose competence universe is the union of the agents' maps.
    pub fn from_agents(agents: Vec<AgentProfile>) -> Self {
        let universe = agents
            .iter()
            .flat_map(|a| a.competences.keys().cloned())
            .collect();
        Self::new(agents, universe)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&AgentProfile> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetenceRequest {
    pub competence: String,
    pub level: f64,
    pub weight: f64,
}

impl CompetenceRequest {
    pub fn new(competence: impl Into<String>, level: f64, weight: f64) -> Self {
        Self {
            competence: competence.into(),
            level,
            weight,
        }
    }
}

/// What a good team looks like for one kind of task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskType {
    /// Importance of proficiency, in `[0, 1]`.
    pub lambda: f64,
    /// Importance of congeniality, in `[-1, 1]`. Negative values favour homogeneous teams.
    pub mu: f64,
    /// Penalty on undercompetence, in `[0, 1]`; overcompetence gets `1 - upsilon`.
    pub upsilon: f64,
    pub requests: Vec<CompetenceRequest>,
}

impl TaskType {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |field: &str, v: f64, lo: f64, hi: f64| {
            if !(lo..=hi).contains(&v) {
                out.push(Violation::new("task", field, format!("{v} outside [{lo}, {hi}]")));
            }
        };
        check("lambda", self.lambda, 0.0, 1.0);
        check("mu", self.mu, -1.0, 1.0);
        check("upsilon", self.upsilon, 0.0, 1.0);
        for (i, r) in self.requests.iter().enumerate() {
            check(&format!("requests[{i}].level"), r.level, 0.0, 1.0);
            check(&format!("requests[{i}].weight"), r.weight, 0.0, 1.0);
        }
        if self.requests.is_empty() {
            out.push(Violation::new("task", "requests", "at least one competence request is required"));
        }
        let mut seen = BTreeSet::new();
        for r in &self.requests {
            if !seen.insert(r.competence.as_str()) {
                out.push(Violation::new(
                    "task",
                    "requests",
                    format!("competence {:?} requested more than once", r.competence),
                ));
            }
        }
        let sum: f64 = self.requests.iter().map(|r| r.weight).sum();
        if !self.requests.is_empty() && (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            out.push(Violation::new("task", "requests.weight", format!("weights sum to {sum}, expected 1")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_type: TaskType,
    /// Target team size `m`, at least 2.
    pub team_size: usize,
}

impl Task {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.task_type.validate();
        if self.team_size < 2 {
            out.push(Violation::new("task", "team_size", format!("{} < 2", self.team_size)));
        }
        out
    }
}

/// A set of at least two agent ids, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Team {
    members: Vec<String>,
}

impl Team {
    pub fn new(members: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        let mut members: Vec<String> = members.into_iter().map(Into::into).collect();
        members.sort();
        let before = members.len();
        members.dedup();
        if members.len() != before {
            return Err(Error::contract("team lists a member twice"));
        }
        if members.len() < 2 {
            return Err(Error::contract(format!(
                "a team needs at least two members, got {}",
                members.len()
            )));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.binary_search_by(|m| m.as_str().cmp(id)).is_ok()
    }
}

/// Scores a 20-answer true/false questionnaire into a personality profile.
///
/// Answers come in blocks of five per dimension, in the order EI, SN, TF, PJ.
/// `keying[q]` is `+1` when agreeing with question `q` points to the positive
/// pole of its dimension and `-1` when it points to the negative pole. Each
/// trait is `(#toward positive - #toward negative) / 5`.
pub fn score_questionnaire(answers: &[bool], keying: &[i8]) -> Result<PersonalityProfile> {
    if answers.len() != QUESTIONNAIRE_LEN {
        return Err(Error::single(
            "questionnaire",
            "answers",
            format!("expected {QUESTIONNAIRE_LEN} answers, got {}", answers.len()),
        ));
    }
    if keying.len() != QUESTIONNAIRE_LEN {
        return Err(Error::single(
            "questionnaire",
            "keying",
            format!("expected {QUESTIONNAIRE_LEN} keys, got {}", keying.len()),
        ));
    }
    if let Some(pos) = keying.iter().position(|k| *k != 1 && *k != -1) {
        return Err(Error::single(
            "questionnaire",
            format!("keying[{pos}]"),
            format!("key must be +1 or -1, got {}", keying[pos]),
        ));
    }
    let dimension = |block: usize| -> f64 {
        let range = block * QUESTIONS_PER_DIMENSION..(block + 1) * QUESTIONS_PER_DIMENSION;
        let net: i32 = range
            .map(|q| {
                let k = i32::from(keying[q]);
                if answers[q] {
                    k
                } else {
                    -k
                }
            })
            .sum();
        f64::from(net) / QUESTIONS_PER_DIMENSION as f64
    };
    let (ei, sn, tf, pj) = (dimension(0), dimension(1), dimension(2), dimension(3));
    Ok(PersonalityProfile { sn, tf, ei, pj })
}

/// Every broken roster invariant. An empty list means the roster is valid.
pub fn validate_roster(roster: &Roster) -> Vec<Violation> {
    let mut out = Vec::new();
    if roster.agents.len() < 2 {
        out.push(Violation::new(
            "roster",
            "agents",
            format!("at least two agents are required, got {}", roster.agents.len()),
        ));
    }
    let mut seen = BTreeSet::new();
    for agent in &roster.agents {
        if agent.id.is_empty() {
            out.push(Violation::new("roster", "id", "empty agent id"));
        }
        if !seen.insert(agent.id.as_str()) {
            out.push(Violation::new(&agent.id, "id", "duplicate agent id"));
        }
        out.extend(agent.personality.violations(&agent.id));
        for (competence, level) in &agent.competences {
            if !(0.0..=1.0).contains(level) {
                out.push(Violation::new(
                    &agent.id,
                    format!("competences.{competence}"),
                    format!("level {level} outside [0, 1]"),
                ));
            }
            if !roster.competence_universe.contains(competence) {
                out.push(Violation::new(
                    &agent.id,
                    format!("competences.{competence}"),
                    "competence not in the roster's competence universe",
                ));
            }
        }
    }
    out
}
