//! Competence assignment and team proficiency.
//!
//! The assignment network has a source, one node per team member, one node
//! per competence request and a sink:
//!
//! - supply arcs `source -> agent`: cost 0, lower bound 1, capacity
//!   `ceil(requests / members)`
//! - transportation arcs `agent -> request`: capacity 1, cost is the
//!   under/over-competence penalty scaled by 1000 and rounded
//! - demand arcs `request -> sink`: cost 0, capacity 1
//!
//! Shipping one unit per request gives an assignment where every request is
//! covered by exactly one member and every member holds at least one request.
//! Ties between optimal assignments are broken towards the lexicographically
//! smallest set of `(agent id, competence id)` pairs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, BoundedArc, Cost};
use crate::model::{AgentProfile, TaskType};

/// Multiplier applied to real-valued arc costs before rounding to integers.
pub const COST_SCALE: f64 = 1000.0;

/// Largest number of `(agent, request)` pairs for which the tie-break is
/// folded into a single flow solve; above it pairs are fixed one at a time.
const MAX_PERTURBED_PAIRS: usize = 90;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Node {
    Source,
    Agent(usize),
    Request(usize),
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkArc {
    pub from: Node,
    pub to: Node,
    pub lower: i64,
    pub capacity: i64,
    pub unit_cost: i64,
}

/// Assignment network for one team and one task type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub agents: Vec<String>,
    pub requests: Vec<String>,
    pub arcs: Vec<NetworkArc>,
}

impl FlowNetwork {
    pub fn node_count(&self) -> usize {
        2 + self.agents.len() + self.requests.len()
    }

    pub fn index(&self, node: Node) -> usize {
        match node {
            Node::Source => 0,
            Node::Agent(i) => 1 + i,
            Node::Request(j) => 1 + self.agents.len() + j,
            Node::Sink => 1 + self.agents.len() + self.requests.len(),
        }
    }

    pub fn arc(&self, from: Node, to: Node) -> Option<&NetworkArc> {
        self.arcs.iter().find(|a| a.from == from && a.to == to)
    }

    /// Cost of the transportation arc from agent `i` to request `j`.
    pub fn transport_cost(&self, i: usize, j: usize) -> i64 {
        self.arc(Node::Agent(i), Node::Request(j))
            .map(|a| a.unit_cost)
            .expect("complete bipartite network")
    }
}

/// Member id to the set of competences that member covers.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompetenceAssignment {
    pub by_agent: BTreeMap<String, BTreeSet<String>>,
}

impl CompetenceAssignment {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut by_agent: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (a, c) in pairs {
            by_agent.entry(a.to_string()).or_default().insert(c.to_string());
        }
        Self { by_agent }
    }

    /// Members assigned to `competence`.
    pub fn covering(&self, competence: &str) -> impl Iterator<Item = &str> + '_ {
        let competence = competence.to_string();
        self.by_agent
            .iter()
            .filter(move |(_, cs)| cs.contains(&competence))
            .map(|(a, _)| a.as_str())
    }

    /// `(agent, competence)` pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        self.by_agent
            .iter()
            .flat_map(|(a, cs)| cs.iter().map(move |c| (a.as_str(), c.as_str())))
            .collect()
    }

    /// Checks both coverage invariants for `team` and `tt`.
    pub fn check(&self, team: &[&AgentProfile], tt: &TaskType) -> Result<()> {
        let ids: BTreeSet<&str> = team.iter().map(|a| a.id.as_str()).collect();
        let requested: BTreeSet<&str> = tt.requests.iter().map(|r| r.competence.as_str()).collect();
        for (agent, cs) in &self.by_agent {
            if !ids.contains(agent.as_str()) {
                return Err(Error::contract(format!("assignment names non-member {agent:?}")));
            }
            if let Some(c) = cs.iter().find(|c| !requested.contains(c.as_str())) {
                return Err(Error::contract(format!("{agent:?} assigned unrequested competence {c:?}")));
            }
        }
        for id in &ids {
            if self.by_agent.get(*id).is_none_or(BTreeSet::is_empty) {
                return Err(Error::contract(format!("member {id:?} has no competence assigned")));
            }
        }
        for c in &requested {
            if self.covering(c).next().is_none() {
                return Err(Error::contract(format!("competence {c:?} is not covered")));
            }
        }
        Ok(())
    }
}

/// Scaled integer cost of letting an agent at `level` cover a request.
pub fn scaled_cost(level: f64, required: f64, upsilon: f64, weight: f64) -> i64 {
    let gap = level - required;
    let c = if gap > 0.0 {
        gap * (1.0 - upsilon) * weight
    } else if gap < 0.0 {
        -gap * upsilon * weight
    } else {
        0.0
    };
    (COST_SCALE * c).round_ties_even() as i64
}

fn supply_capacity(members: usize, requests: usize) -> i64 {
    requests.div_ceil(members) as i64
}

pub fn build_network(team: &[&AgentProfile], tt: &TaskType) -> Result<FlowNetwork> {
    if team.len() < 2 {
        return Err(Error::contract(format!("team of {} is too small", team.len())));
    }
    let (k, r) = (team.len(), tt.requests.len());
    if r < k {
        return Err(Error::InfeasibleAssignment {
            team: team.iter().map(|a| a.id.clone()).collect(),
            agents: k,
            requests: r,
        });
    }
    let cap = supply_capacity(k, r);
    let mut arcs = Vec::with_capacity(k + k * r + r);
    for i in 0..k {
        arcs.push(NetworkArc { from: Node::Source, to: Node::Agent(i), lower: 1, capacity: cap, unit_cost: 0 });
    }
    for (i, a) in team.iter().enumerate() {
        for (j, req) in tt.requests.iter().enumerate() {
            arcs.push(NetworkArc {
                from: Node::Agent(i),
                to: Node::Request(j),
                lower: 0,
                capacity: 1,
                unit_cost: scaled_cost(a.level(&req.competence), req.level, tt.upsilon, req.weight),
            });
        }
    }
    for j in 0..r {
        arcs.push(NetworkArc { from: Node::Request(j), to: Node::Sink, lower: 0, capacity: 1, unit_cost: 0 });
    }
    Ok(FlowNetwork {
        agents: team.iter().map(|a| a.id.clone()).collect(),
        requests: tt.requests.iter().map(|q| q.competence.clone()).collect(),
        arcs,
    })
}

/// An optimal assignment with its total scaled cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedAssignment {
    pub assignment: CompetenceAssignment,
    pub scaled_cost: i64,
}

pub fn solve_assignment(team: &[&AgentProfile], tt: &TaskType) -> Result<CompetenceAssignment> {
    solve_assignment_with_cost(team, tt).map(|s| s.assignment)
}

pub fn solve_assignment_with_cost(team: &[&AgentProfile], tt: &TaskType) -> Result<SolvedAssignment> {
    let net = build_network(team, tt)?;
    if transport_pairs(&net).len() <= MAX_PERTURBED_PAIRS {
        solve_perturbed(&net)
    } else {
        solve_by_fixing(&net)
    }
}

/// Transportation pair `(i, j)` list sorted by `(agent id, competence id)`.
fn transport_pairs(net: &FlowNetwork) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..net.agents.len())
        .flat_map(|i| (0..net.requests.len()).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|&(i1, j1), &(i2, j2)| {
        (&net.agents[i1], &net.requests[j1]).cmp(&(&net.agents[i2], &net.requests[j2]))
    });
    pairs
}

fn bounded_arcs(net: &FlowNetwork, cost_of: impl Fn(&NetworkArc) -> Cost) -> Vec<BoundedArc> {
    net.arcs
        .iter()
        .map(|a| BoundedArc {
            from: net.index(a.from),
            to: net.index(a.to),
            lower: a.lower,
            upper: a.capacity,
            cost: cost_of(a),
        })
        .collect()
}

fn run(net: &FlowNetwork, arcs: &[BoundedArc]) -> Option<(Vec<i64>, Cost)> {
    flow::solve_bounded(
        net.node_count(),
        arcs,
        net.index(Node::Source),
        net.index(Node::Sink),
        net.requests.len() as i64,
    )
}

fn decode(net: &FlowNetwork, flows: &[i64]) -> SolvedAssignment {
    let mut pairs = Vec::new();
    let mut scaled_cost = 0;
    for (a, &f) in net.arcs.iter().zip(flows) {
        if let (Node::Agent(i), Node::Request(j), true) = (a.from, a.to, f > 0) {
            pairs.push((net.agents[i].as_str(), net.requests[j].as_str()));
            scaled_cost += a.unit_cost;
        }
    }
    SolvedAssignment {
        assignment: CompetenceAssignment::from_pairs(pairs),
        scaled_cost,
    }
}

fn infeasible(net: &FlowNetwork) -> Error {
    Error::InfeasibleAssignment {
        team: net.agents.clone(),
        agents: net.agents.len(),
        requests: net.requests.len(),
    }
}

/// One solve with costs `cost·M + 2^P - 2^(P-1-rank)`. Every feasible flow
/// uses exactly `requests` pairs, so a unit of real cost outweighs any
/// difference in the tie-break terms, and among equal real costs the set
/// holding the smallest differing pair wins.
fn solve_perturbed(net: &FlowNetwork) -> Result<SolvedAssignment> {
    let pairs = transport_pairs(net);
    let p = pairs.len() as u32;
    let mut rank = BTreeMap::new();
    for (r, &(i, j)) in pairs.iter().enumerate() {
        rank.insert((i, j), r as u32);
    }
    let top: Cost = 1 << p;
    let scale: Cost = (net.requests.len() as Cost + 1) * top;
    let arcs = bounded_arcs(net, |a| match (a.from, a.to) {
        (Node::Agent(i), Node::Request(j)) => {
            Cost::from(a.unit_cost) * scale + top - (1 << (p - 1 - rank[&(i, j)]))
        }
        _ => 0,
    });
    let (flows, _) = run(net, &arcs).ok_or_else(|| infeasible(net))?;
    Ok(decode(net, &flows))
}

/// Fallback for large networks: find the optimum, then walk the pairs in
/// lexicographic order and force each one in when an optimal flow still
/// exists with it, out otherwise.
fn solve_by_fixing(net: &FlowNetwork) -> Result<SolvedAssignment> {
    let mut arcs = bounded_arcs(net, |a| Cost::from(a.unit_cost));
    let (_, optimum) = run(net, &arcs).ok_or_else(|| infeasible(net))?;
    let arc_of = |i: usize, j: usize| {
        net.arcs
            .iter()
            .position(|a| a.from == Node::Agent(i) && a.to == Node::Request(j))
            .expect("transport arc")
    };
    for (i, j) in transport_pairs(net) {
        let k = arc_of(i, j);
        arcs[k].lower = 1;
        match run(net, &arcs) {
            Some((_, c)) if c == optimum => {}
            _ => {
                arcs[k].lower = 0;
                arcs[k].upper = 0;
            }
        }
    }
    let (flows, _) = run(net, &arcs).ok_or_else(|| infeasible(net))?;
    Ok(decode(net, &flows))
}

/// Total scaled cost of an arbitrary assignment.
pub fn assignment_cost(team: &[&AgentProfile], tt: &TaskType, asg: &CompetenceAssignment) -> Result<i64> {
    asg.check(team, tt)?;
    let mut total = 0;
    for req in &tt.requests {
        for id in asg.covering(&req.competence) {
            let a = team.iter().find(|a| a.id == id).expect("checked member");
            total += scaled_cost(a.level(&req.competence), req.level, tt.upsilon, req.weight);
        }
    }
    Ok(total)
}

/// Weighted average gap of assigned agents on one side of the required level.
/// `sign` is `-1.0` for undercompetence and `1.0` for overcompetence.
fn competence_degree(team: &[&AgentProfile], tt: &TaskType, asg: &CompetenceAssignment, sign: f64) -> Result<f64> {
    asg.check(team, tt)?;
    let mut total = 0.0;
    for req in &tt.requests {
        let mut sum = 0.0;
        let mut count = 0usize;
        for id in asg.covering(&req.competence) {
            let a = team.iter().find(|a| a.id == id).expect("checked member");
            let gap = sign * (a.level(&req.competence) - req.level);
            if gap > 0.0 {
                sum += gap;
                count += 1;
            }
        }
        if count > 0 {
            total += req.weight * sum / count as f64;
        }
    }
    Ok(total)
}

pub fn undercompetence(team: &[&AgentProfile], tt: &TaskType, asg: &CompetenceAssignment) -> Result<f64> {
    competence_degree(team, tt, asg, -1.0)
}

pub fn overcompetence(team: &[&AgentProfile], tt: &TaskType, asg: &CompetenceAssignment) -> Result<f64> {
    competence_degree(team, tt, asg, 1.0)
}

/// `1 - (υ·under + (1 - υ)·over)`.
pub fn proficiency(team: &[&AgentProfile], tt: &TaskType, asg: &CompetenceAssignment) -> Result<f64> {
    let u = undercompetence(team, tt, asg)?;
    let o = overcompetence(team, tt, asg)?;
    Ok(1.0 - (tt.upsilon * u + (1.0 - tt.upsilon) * o))
}
