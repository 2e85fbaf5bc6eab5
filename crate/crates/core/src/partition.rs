//! Size-constrained partitions and their values.
//!
//! A partition constrained by size `m` has every team size in
//! `[max(m-1, 2), m+1]` and no two teams differing by more than one member.
//! The partition value is the Bernoulli-Nash product of team values.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::assignment::{self, CompetenceAssignment};
use crate::congeniality::{self, CongenialityParams};
use crate::error::{Error, Result, Violation};
use crate::model::{AgentProfile, Roster, TaskType, Team};

/// Floor applied to team values inside the search objective.
pub const VALUE_FLOOR: f64 = 1e-6;

/// Inclusive team-size bounds for target size `m`.
pub fn size_bounds(m: usize) -> (usize, usize) {
    ((m.saturating_sub(1)).max(2), m + 1)
}

/// How many teams of which size make up a partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TeamCountPlan {
    /// `(count, size)` pairs.
    pub entries: Vec<(usize, usize)>,
}

impl TeamCountPlan {
    pub fn sentinel(m: usize) -> Self {
        Self { entries: vec![(0, m)] }
    }

    pub fn is_sentinel(&self) -> bool {
        self.entries.iter().all(|&(count, _)| count == 0)
    }

    /// Team sizes expanded in plan order.
    pub fn sizes(&self) -> Vec<usize> {
        self.entries
            .iter()
            .flat_map(|&(count, size)| std::iter::repeat_n(size, count))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|&(c, s)| c * s).sum()
    }

    pub fn team_count(&self) -> usize {
        self.entries.iter().map(|&(c, _)| c).sum()
    }

    /// Whether the plan's sizes satisfy both size conditions for `m`.
    pub fn respects_bounds(&self, m: usize) -> bool {
        sizes_valid(&self.sizes(), m)
    }

    fn nonzero(entries: Vec<(usize, usize)>) -> Self {
        Self {
            entries: entries.into_iter().filter(|&(c, _)| c > 0).collect(),
        }
    }
}

fn sizes_valid(sizes: &[usize], m: usize) -> bool {
    let (lo, hi) = size_bounds(m);
    let (Some(min), Some(max)) = (sizes.iter().min(), sizes.iter().max()) else {
        return false;
    };
    *min >= lo && *max <= hi && max - min <= 1
}

/// The four-case piecewise rule, applied top-down.
fn piecewise_plan(n: usize, m: usize) -> TeamCountPlan {
    if n < m {
        return TeamCountPlan::sentinel(m);
    }
    let b = n / m;
    let r = n % m;
    if r == 0 {
        TeamCountPlan::nonzero(vec![(b, m)])
    } else if r <= b {
        TeamCountPlan::nonzero(vec![(r, m + 1), (b - r, m)])
    } else {
        TeamCountPlan::nonzero(vec![(b, m), (1, r)])
    }
}

/// Number of agents per team for `n` agents and target size `m`.
///
/// Follows the piecewise rule. Its last non-trivial case (`n mod m > b`)
/// appends a remainder team of size `n mod m`, which breaks the size bounds
/// unless that remainder is `m - 1`. In that case the plan is replaced by
/// the valid two-size plan whose sizes are closest to `m` (fewest teams on
/// ties), or by the sentinel `{(0, m)}` when none exists.
pub fn quantity_distribution(n: usize, m: usize) -> TeamCountPlan {
    let plan = piecewise_plan(n, m);
    if plan.is_sentinel() || plan.respects_bounds(m) {
        return plan;
    }
    nearest_valid_plan(n, m).unwrap_or_else(|| TeamCountPlan::sentinel(m))
}

fn nearest_valid_plan(n: usize, m: usize) -> Option<TeamCountPlan> {
    let (lo, hi) = size_bounds(m);
    (1..=n / lo)
        .filter_map(|k| {
            let (q, r) = (n / k, n % k);
            let sizes_ok = q >= lo && q + usize::from(r > 0) <= hi;
            sizes_ok.then(|| {
                let deviation = r * (q + 1).abs_diff(m) + (k - r) * q.abs_diff(m);
                (deviation, k, TeamCountPlan::nonzero(vec![(r, q + 1), (k - r, q)]))
            })
        })
        .min_by_key(|&(deviation, k, _)| (deviation, k))
        .map(|(_, _, plan)| plan)
}

/// Disjoint teams covering a roster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TeamPartition {
    pub teams: Vec<Team>,
}

impl TeamPartition {
    pub fn new(teams: Vec<Team>) -> Self {
        Self { teams }
    }

    /// Same partition with teams in lexicographic order of their member lists.
    pub fn canonical(mut self) -> Self {
        self.teams.sort();
        self
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.teams.iter().map(Team::len).collect()
    }
}

/// Every violation of disjointness, coverage and the two size conditions.
pub fn validate_partition(p: &TeamPartition, roster: &Roster, m: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let (lo, hi) = size_bounds(m);
    let known: BTreeSet<&str> = roster.agents.iter().map(|a| a.id.as_str()).collect();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (t, team) in p.teams.iter().enumerate() {
        let subject = format!("team[{t}]");
        if team.len() < lo || team.len() > hi {
            out.push(Violation::new(
                &subject,
                "size",
                format!("size {} outside [{lo}, {hi}] for m={m}", team.len()),
            ));
        }
        for id in team.members() {
            if !known.contains(id.as_str()) {
                out.push(Violation::new(&subject, "members", format!("unknown agent {id:?}")));
            }
            if let Some(prev) = seen.insert(id.as_str(), t) {
                out.push(Violation::new(
                    &subject,
                    "members",
                    format!("agent {id:?} also in team[{prev}]"),
                ));
            }
        }
    }
    for id in &known {
        if !seen.contains_key(id) {
            out.push(Violation::new("partition", "coverage", format!("agent {id:?} is in no team")));
        }
    }
    if let (Some(min), Some(max)) = (p.teams.iter().map(Team::len).min(), p.teams.iter().map(Team::len).max()) {
        if max - min > 1 {
            out.push(Violation::new(
                "partition",
                "sizes",
                format!("team sizes differ by {} (largest {max}, smallest {min})", max - min),
            ));
        }
    }
    if p.teams.is_empty() {
        out.push(Violation::new("partition", "teams", "no teams"));
    }
    out
}

/// `λ·proficiency + μ·congeniality`.
pub fn synergistic_value(
    team: &[&AgentProfile],
    tt: &TaskType,
    asg: &CompetenceAssignment,
    params: CongenialityParams,
) -> Result<f64> {
    let prof = assignment::proficiency(team, tt, asg)?;
    let con = congeniality::congeniality(team, params)?;
    Ok(combine(tt, prof, con))
}

fn combine(tt: &TaskType, proficiency: f64, congeniality: f64) -> f64 {
    tt.lambda * proficiency + tt.mu * congeniality
}

/// A team with its optimal assignment and component scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamEvaluation {
    pub team: Team,
    pub assignment: CompetenceAssignment,
    pub proficiency: f64,
    pub congeniality: f64,
    pub value: f64,
}

impl TeamEvaluation {
    pub fn clamped(&self) -> bool {
        self.value < VALUE_FLOOR
    }

    pub fn guarded_value(&self) -> f64 {
        guard(self.value)
    }
}

fn guard(v: f64) -> f64 {
    v.max(VALUE_FLOOR)
}

/// Solves the assignment for `members` and scores the team. Members are
/// evaluated in id order so the result does not depend on input order.
pub fn evaluate_team(
    members: &[&AgentProfile],
    tt: &TaskType,
    params: CongenialityParams,
) -> Result<TeamEvaluation> {
    let mut sorted = members.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let team = Team::new(sorted.iter().map(|a| a.id.clone()))?;
    let asg = assignment::solve_assignment(&sorted, tt)?;
    let proficiency = assignment::proficiency(&sorted, tt, &asg)?;
    let congeniality = congeniality::congeniality(&sorted, params)?;
    Ok(TeamEvaluation {
        team,
        assignment: asg,
        proficiency,
        congeniality,
        value: combine(tt, proficiency, congeniality),
    })
}

/// Plain product of team values.
pub fn bernoulli_nash(values: &[f64]) -> f64 {
    values.iter().product()
}

/// Product of team values after flooring each at [`VALUE_FLOOR`].
pub fn guarded_product(values: &[f64]) -> f64 {
    values.iter().map(|&v| guard(v)).product()
}

/// A partition with per-team assignments and values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredPartition {
    pub partition: TeamPartition,
    pub teams: Vec<TeamEvaluation>,
    /// Product of raw team values.
    pub product_value: f64,
    /// Product of floored team values; the quantity the search maximises.
    pub objective_value: f64,
    /// Teams whose value fell below the floor.
    pub clamped_teams: usize,
}

impl ScoredPartition {
    /// Assembles from evaluated teams, ordering them canonically first.
    pub fn from_evaluations(mut teams: Vec<TeamEvaluation>) -> Self {
        teams.sort_by(|a, b| a.team.cmp(&b.team));
        let values: Vec<f64> = teams.iter().map(|t| t.value).collect();
        Self {
            partition: TeamPartition::new(teams.iter().map(|t| t.team.clone()).collect()),
            product_value: bernoulli_nash(&values),
            objective_value: guarded_product(&values),
            clamped_teams: teams.iter().filter(|t| t.clamped()).count(),
            teams,
        }
    }

    pub fn team_values(&self) -> Vec<f64> {
        self.teams.iter().map(|t| t.value).collect()
    }

    pub fn assignments(&self) -> Vec<&CompetenceAssignment> {
        self.teams.iter().map(|t| &t.assignment).collect()
    }
}

/// Product of the partition's team values.
pub fn partition_value(sp: &ScoredPartition) -> f64 {
    bernoulli_nash(&sp.team_values())
}

/// Evaluates every team of `p` against the roster.
pub fn score_partition(
    p: &TeamPartition,
    roster: &Roster,
    tt: &TaskType,
    params: CongenialityParams,
) -> Result<ScoredPartition> {
    let teams = p
        .teams
        .iter()
        .map(|team| {
            let members = team
                .members()
                .iter()
                .map(|id| {
                    roster
                        .get(id)
                        .ok_or_else(|| Error::single("partition", "members", format!("unknown agent {id:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            evaluate_team(&members, tt, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoredPartition::from_evaluations(teams))
}
