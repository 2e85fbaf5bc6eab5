//! JSON file formats read and written by the command-line tool.
//!
//! Roster:
//!
//! ```json
//! {
//!   "competence_universe": ["c1", "c2"],
//!   "keying": [1, -1, ...],
//!   "agents": [
//!     {"id": "s01", "gender": "woman", "personality": [0.2, -0.6, 1.0, 0.2],
//!      "competences": {"c1": 0.7}},
//!     {"id": "s02", "gender": "man", "answers": [true, false, ...]}
//!   ]
//! }
//! ```
//!
//! `personality` is `[sn, tf, ei, pj]`; `answers` is the 20-answer
//! questionnaire (EI, SN, TF, PJ blocks) scored with `keying`, which defaults
//! to all `+1`. `competence_universe` defaults to every competence an agent
//! lists.
//!
//! Task: `{"lambda", "mu", "upsilon", "team_size", "requests": [{"competence", "level", "weight"}]}`.
//!
//! Partition: `{"teams": [["s01", "s02"], ...]}`. A run report is accepted in
//! its place and its `partition` field is used.
//!
//! Scores: `{"team-id": value, ...}`.
//!
//! Marks: `{"keying": [...], "students": [{"id", "gender", "personality" | "answers", "marks": {subject: mark}}]}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::model::{
    score_questionnaire, validate_roster, AgentProfile, CompetenceRequest, Gender, PersonalityProfile, Roster,
    Task, TaskType, Team, QUESTIONNAIRE_LEN,
};
use crate::partition::TeamPartition;

fn parse<'a, T: Deserialize<'a>>(what: &str, text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::single(
            what,
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// 1-based line of the first `"id": "<id>"` occurrence in `text`.
fn line_of_id(text: &str, id: &str) -> Option<usize> {
    let needle = serde_json::to_string(id).ok()?;
    let mut from = 0;
    while let Some(off) = text[from..].find(&needle) {
        let at = from + off;
        let before = text[..at].trim_end();
        if let Some(head) = before.strip_suffix(':') {
            if head.trim_end().ends_with("\"id\"") {
                return Some(text[..at].matches('\n').count() + 1);
            }
        }
        from = at + needle.len();
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub id: String,
    pub gender: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub personality: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<Vec<bool>>,
    #[serde(default)]
    pub competences: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosterFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub competence_universe: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keying: Option<Vec<i8>>,
    pub agents: Vec<AgentRecord>,
}

fn personality_of(
    subject: &str,
    personality: Option<&[f64]>,
    answers: Option<&[bool]>,
    keying: &[i8],
    out: &mut Vec<Violation>,
) -> Option<PersonalityProfile> {
    match (personality, answers) {
        (Some(p), None) => {
            if p.len() != 4 {
                out.push(Violation::new(subject, "personality", format!("expected 4 traits, got {}", p.len())));
                return None;
            }
            match PersonalityProfile::new(p[0], p[1], p[2], p[3]) {
                Ok(p) => Some(p),
                Err(Error::Validation(v)) => {
                    out.extend(v.into_iter().map(|v| Violation { subject: subject.to_string(), ..v }));
                    None
                }
                Err(e) => {
                    out.push(Violation::new(subject, "personality", e.to_string()));
                    None
                }
            }
        }
        (None, Some(a)) => match score_questionnaire(a, keying) {
            Ok(p) => Some(p),
            Err(e) => {
                out.push(Violation::new(subject, "answers", e.to_string()));
                None
            }
        },
        (Some(_), Some(_)) => {
            out.push(Violation::new(subject, "personality", "give either personality or answers, not both"));
            None
        }
        (None, None) => {
            out.push(Violation::new(subject, "personality", "missing personality or answers"));
            None
        }
    }
}

impl RosterFile {
    pub fn into_roster(self, text: &str) -> Result<Roster> {
        let keying = self.keying.clone().unwrap_or_else(|| vec![1; QUESTIONNAIRE_LEN]);
        let mut violations = Vec::new();
        let mut agents = Vec::with_capacity(self.agents.len());
        for (i, rec) in self.agents.into_iter().enumerate() {
            let subject = match line_of_id(text, &rec.id) {
                Some(line) => format!("agents[{i}] {:?} (line {line})", rec.id),
                None => format!("agents[{i}] {:?}", rec.id),
            };
            let gender = Gender::parse(&rec.gender);
            if gender.is_none() {
                violations.push(Violation::new(
                    &subject,
                    "gender",
                    format!("{:?} is not supported; expected \"man\" or \"woman\"", rec.gender),
                ));
            }
            let personality =
                personality_of(&subject, rec.personality.as_deref(), rec.answers.as_deref(), &keying, &mut violations);
            if let (Some(gender), Some(personality)) = (gender, personality) {
                agents.push((subject, AgentProfile { id: rec.id, gender, personality, competences: rec.competences }));
            }
        }
        let universe: BTreeSet<String> = match self.competence_universe {
            Some(u) => u.into_iter().collect(),
            None => agents.iter().flat_map(|(_, a)| a.competences.keys().cloned()).collect(),
        };
        let subjects: BTreeMap<String, String> =
            agents.iter().map(|(s, a)| (a.id.clone(), s.clone())).collect();
        let roster = Roster::new(agents.into_iter().map(|(_, a)| a).collect(), universe);
        violations.extend(validate_roster(&roster).into_iter().map(|v| Violation {
            subject: subjects.get(&v.subject).cloned().unwrap_or(v.subject),
            ..v
        }));
        if violations.is_empty() {
            Ok(roster)
        } else {
            Err(Error::Validation(violations))
        }
    }
}

pub fn load_roster(text: &str) -> Result<Roster> {
    parse::<RosterFile>("roster", text)?.into_roster(text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub lambda: f64,
    pub mu: f64,
    pub upsilon: f64,
    pub team_size: usize,
    pub requests: Vec<CompetenceRequest>,
}

pub fn load_task(text: &str) -> Result<Task> {
    let f: TaskFile = parse("task", text)?;
    let task = Task {
        task_type: TaskType {
            lambda: f.lambda,
            mu: f.mu,
            upsilon: f.upsilon,
            requests: f.requests,
        },
        team_size: f.team_size,
    };
    let v = task.validate();
    if v.is_empty() {
        Ok(task)
    } else {
        Err(Error::Validation(v))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionFile {
    pub teams: Vec<Vec<String>>,
}

/// Reads `{"teams": [[...]]}` or a run report carrying a `partition` field.
pub fn load_partition(text: &str) -> Result<TeamPartition> {
    let value: serde_json::Value = parse("partition", text)?;
    let body = match value.get("teams") {
        Some(t) if t.as_array().is_some_and(|a| a.iter().all(|x| x.is_array())) => value.clone(),
        _ => value
            .get("partition")
            .cloned()
            .ok_or_else(|| Error::single("partition", "teams", "expected a \"teams\" list of id lists"))?,
    };
    let file: PartitionFile = serde_json::from_value(body)
        .map_err(|e| Error::single("partition", "teams", e.to_string()))?;
    let mut violations = Vec::new();
    let mut teams = Vec::new();
    for (i, t) in file.teams.into_iter().enumerate() {
        match Team::new(t) {
            Ok(t) => teams.push(t),
            Err(e) => violations.push(Violation::new(format!("team[{i}]"), "members", e.to_string())),
        }
    }
    if violations.is_empty() {
        Ok(TeamPartition::new(teams))
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn load_scores(text: &str) -> Result<BTreeMap<String, f64>> {
    parse("scores", text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudentRecord {
    pub id: String,
    pub gender: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub personality: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<Vec<bool>>,
    pub marks: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarksFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keying: Option<Vec<i8>>,
    pub students: Vec<StudentRecord>,
}

pub fn load_marks(text: &str) -> Result<MarksFile> {
    parse("marks", text)
}
