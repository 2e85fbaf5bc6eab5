//! Partition search: a random size-constrained partition improved by annealed
//! crossover of two teams at a time, plus an exhaustive optimum for small
//! rosters.
//!
//! Each iteration picks two distinct teams uniformly at random, enumerates
//! every other split of their union into two teams of the same sizes, and
//! moves to the best split. A worse best split is still taken with the
//! Metropolis probability `exp(Δ / (acceptance_scale · heat))`, where `Δ` is
//! the change in the two teams' (floored) value product. Heat starts at
//! `initial_heat` and drops by `cooling_rate` per iteration until it reaches 1.
//!
//! Randomness is drawn from a ChaCha8 stream seeded with `rng_seed`, in this
//! order: the roster shuffle for the initial partition; then per iteration
//! the first team index (`0..k`), the second (`0..k-1`, shifted past the
//! first), and one uniform `[0, 1)` draw only when the best split is not an
//! improvement. Iterations on a single-team partition draw nothing.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::congeniality::CongenialityParams;
use crate::error::{Error, Result, Violation};
use crate::model::{AgentProfile, Roster, Task, Team};
use crate::partition::{
    evaluate_team, quantity_distribution, size_bounds, ScoredPartition, TeamEvaluation, TeamPartition,
};

pub const DEFAULT_HEAT: f64 = 10.0;
pub const DEFAULT_COOLING_RATE: f64 = 0.01;
pub const DEFAULT_ACCEPTANCE_SCALE: f64 = 0.01;

/// Largest roster [`brute_force_optimum`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealConfig {
    pub initial_heat: f64,
    pub cooling_rate: f64,
    pub rng_seed: u64,
    pub acceptance_scale: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_heat: DEFAULT_HEAT,
            cooling_rate: DEFAULT_COOLING_RATE,
            rng_seed: 0,
            acceptance_scale: DEFAULT_ACCEPTANCE_SCALE,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.initial_heat.is_finite() && self.initial_heat > 1.0) {
            out.push(Violation::new("anneal", "initial_heat", format!("{} must be > 1", self.initial_heat)));
        }
        if !(self.cooling_rate.is_finite() && self.cooling_rate > 0.0) {
            out.push(Violation::new("anneal", "cooling_rate", format!("{} must be > 0", self.cooling_rate)));
        }
        if !(self.acceptance_scale.is_finite() && self.acceptance_scale > 0.0) {
            out.push(Violation::new(
                "anneal",
                "acceptance_scale",
                format!("{} must be > 0", self.acceptance_scale),
            ));
        }
        out
    }

    /// `ceil((initial_heat - 1) / cooling_rate)`, snapping quotients that are
    /// integers up to rounding error (e.g. `9 / 0.001`) to that integer.
    pub fn iteration_budget(&self) -> usize {
        let x = (self.initial_heat - 1.0) / self.cooling_rate;
        let r = x.round();
        if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
            r as usize
        } else {
            x.ceil() as usize
        }
    }

    /// Heat during iteration `k` (zero-based).
    pub fn heat_at(&self, k: usize) -> f64 {
        self.initial_heat - k as f64 * self.cooling_rate
    }
}

/// Counters and the best-ever value after every iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnnealTrace {
    pub iterations: usize,
    pub improvements: usize,
    pub accepted_worse: usize,
    pub rejected: usize,
    /// Team evaluations whose value fell below the floor.
    pub clamp_events: usize,
    pub best_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub best: ScoredPartition,
    pub trace: AnnealTrace,
}

fn initial_groups<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    let plan = quantity_distribution(n, m);
    if plan.is_sentinel() {
        return Err(Error::NoPartition { n, m });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut groups = Vec::with_capacity(plan.team_count());
    let mut next = 0;
    for size in plan.sizes() {
        groups.push(order[next..next + size].to_vec());
        next += size;
    }
    Ok(groups)
}

/// Shuffles the roster and slices it into consecutive runs following the
/// team-count plan for `m`.
pub fn initial_partition<R: Rng>(roster: &Roster, m: usize, rng: &mut R) -> Result<TeamPartition> {
    let groups = initial_groups(roster.len(), m, rng)?;
    groups
        .iter()
        .map(|g| Team::new(g.iter().map(|&i| roster.agents[i].id.clone())))
        .collect::<Result<Vec<_>>>()
        .map(TeamPartition::new)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Every split of `union` (sorted) into two teams with valid sizes for `m`.
fn two_team_splits<T: Clone + Ord>(union: &[T], m: usize) -> Vec<(Vec<T>, Vec<T>)> {
    let (lo, hi) = size_bounds(m);
    let total = union.len();
    let mut out = Vec::new();
    for a in lo..=total / 2 {
        let b = total - a;
        if b > hi || b - a > 1 {
            continue;
        }
        for combo in combinations(total, a) {
            if a == b && combo[0] != 0 {
                continue;
            }
            let mut inside = vec![false; total];
            for &i in &combo {
                inside[i] = true;
            }
            let first: Vec<T> = combo.iter().map(|&i| union[i].clone()).collect();
            let second: Vec<T> = (0..total).filter(|&i| !inside[i]).map(|i| union[i].clone()).collect();
            out.push((first, second));
        }
    }
    out
}

fn same_split<T: Ord + Clone>(split: &(Vec<T>, Vec<T>), a: &[T], b: &[T]) -> bool {
    let sorted = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort();
        v
    };
    let (x, y) = (sorted(a), sorted(b));
    (split.0 == x && split.1 == y) || (split.0 == y && split.1 == x)
}

/// Every two-team partition of `k1 ∪ k2` with valid sizes for `m`, except
/// the current split `{k1, k2}`.
pub fn crossover_candidates(k1: &Team, k2: &Team, m: usize) -> Vec<TeamPartition> {
    let mut union: Vec<String> = k1.members().iter().chain(k2.members()).cloned().collect();
    union.sort();
    union.dedup();
    two_team_splits(&union, m)
        .into_iter()
        .filter(|s| !same_split(s, k1.members(), k2.members()))
        .filter_map(|(a, b)| Some(TeamPartition::new(vec![Team::new(a).ok()?, Team::new(b).ok()?])))
        .collect()
}

/// Candidate split value, member indices and evaluations.
type Split = (f64, [Vec<usize>; 2], [Rc<TeamEvaluation>; 2]);

/// Distinct teams kept per run before the cache is flushed.
const CACHE_LIMIT: usize = 1 << 16;

/// Team evaluations memoised by sorted roster indices. Evaluation is a pure
/// function of the members, so a cached result equals a fresh one.
struct Evaluator<'a> {
    roster: &'a Roster,
    task: &'a Task,
    params: CongenialityParams,
    cache: RefCell<HashMap<Vec<usize>, Rc<TeamEvaluation>>>,
}

impl<'a> Evaluator<'a> {
    fn new(roster: &'a Roster, task: &'a Task, params: CongenialityParams) -> Self {
        Self { roster, task, params, cache: RefCell::new(HashMap::new()) }
    }

    fn solve(&self, members: &[usize]) -> Result<TeamEvaluation> {
        let refs: Vec<&AgentProfile> = members.iter().map(|&i| &self.roster.agents[i]).collect();
        evaluate_team(&refs, &self.task.task_type, self.params)
    }

    fn team(&self, members: &[usize]) -> Result<Rc<TeamEvaluation>> {
        if let Some(e) = self.cache.borrow().get(members) {
            return Ok(Rc::clone(e));
        }
        let e = Rc::new(self.solve(members)?);
        let mut cache = self.cache.borrow_mut();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(members.to_vec(), Rc::clone(&e));
        Ok(e)
    }
}

/// Floored product over teams in canonical order, bit-identical to
/// `ScoredPartition::objective_value` for the same teams.
fn objective<'e>(evals: impl IntoIterator<Item = &'e TeamEvaluation>) -> f64 {
    let mut refs: Vec<&TeamEvaluation> = evals.into_iter().collect();
    refs.sort_by(|a, b| a.team.cmp(&b.team));
    refs.iter().map(|e| e.guarded_value()).product()
}

fn check_inputs(roster: &Roster, task: &Task, cfg: Option<&AnnealConfig>) -> Result<()> {
    let mut v = crate::model::validate_roster(roster);
    v.extend(task.validate());
    if let Some(cfg) = cfg {
        v.extend(cfg.validate());
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

/// Callback receiving the iteration index and current partition.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &TeamPartition);

pub fn optimize(roster: &Roster, task: &Task, params: CongenialityParams, cfg: &AnnealConfig) -> Result<Optimized> {
    optimize_observed(roster, task, params, cfg, None)
}

/// [`optimize`] that hands the current partition to `observer` after every
/// iteration.
pub fn optimize_observed(
    roster: &Roster,
    task: &Task,
    params: CongenialityParams,
    cfg: &AnnealConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<Optimized> {
    check_inputs(roster, task, Some(cfg))?;
    let eval = Evaluator::new(roster, task, params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let m = task.team_size;

    let mut groups = initial_groups(roster.len(), m, &mut rng)?;
    for g in &mut groups {
        g.sort_unstable();
    }
    let mut evals = groups.iter().map(|g| eval.team(g)).collect::<Result<Vec<_>>>()?;
    let mut trace = AnnealTrace {
        clamp_events: evals.iter().filter(|e| e.clamped()).count(),
        ..AnnealTrace::default()
    };
    let mut best_groups = groups.clone();
    let mut best_value = objective(evals.iter().map(|e| &**e));

    let budget = cfg.iteration_budget();
    trace.best_values.reserve(budget);
    for k in 0..budget {
        let heat = cfg.heat_at(k);
        let teams = groups.len();
        if teams >= 2 {
            let i = rng.gen_range(0..teams);
            let mut j = rng.gen_range(0..teams - 1);
            if j >= i {
                j += 1;
            }
            let contr = evals[i].guarded_value() * evals[j].guarded_value();
            let mut union: Vec<usize> = groups[i].iter().chain(&groups[j]).copied().collect();
            union.sort_unstable();

            let mut best: Option<Split> = None;
            for split in two_team_splits(&union, m) {
                if same_split(&split, &groups[i], &groups[j]) {
                    continue;
                }
                let (a, b) = split;
                let (ea, eb) = (eval.team(&a)?, eval.team(&b)?);
                trace.clamp_events += usize::from(ea.clamped()) + usize::from(eb.clamped());
                let value = ea.guarded_value() * eb.guarded_value();
                if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
                    best = Some((value, [a, b], [ea, eb]));
                }
            }

            if let Some((value, [a, b], [ea, eb])) = best {
                let accept = if value > contr {
                    trace.improvements += 1;
                    true
                } else {
                    let p = ((value - contr) / (cfg.acceptance_scale * heat)).exp().min(1.0);
                    let u: f64 = rng.gen();
                    let take = p >= u;
                    if take {
                        trace.accepted_worse += 1;
                    } else {
                        trace.rejected += 1;
                    }
                    take
                };
                if accept {
                    groups[i] = a;
                    groups[j] = b;
                    evals[i] = ea;
                    evals[j] = eb;
                }
            }
        }

        let current = objective(evals.iter().map(|e| &**e));
        if current > best_value {
            best_value = current;
            best_groups = groups.clone();
        }
        trace.iterations += 1;
        trace.best_values.push(best_value);
        if let Some(obs) = observer.as_deref_mut() {
            obs(k, &to_partition(roster, &groups)?);
        }
    }

    let fresh = best_groups.iter().map(|g| eval.solve(g)).collect::<Result<Vec<_>>>()?;
    Ok(Optimized {
        best: ScoredPartition::from_evaluations(fresh),
        trace,
    })
}

fn to_partition(roster: &Roster, groups: &[Vec<usize>]) -> Result<TeamPartition> {
    groups
        .iter()
        .map(|g| Team::new(g.iter().map(|&i| roster.agents[i].id.clone())))
        .collect::<Result<Vec<_>>>()
        .map(TeamPartition::new)
}

/// Every partition of `0..n` into teams whose sizes form the multiset `sizes`.
pub fn enumerate_partitions(n: usize, sizes: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn rec(
        remaining: &[usize],
        counts: &mut Vec<(usize, usize)>,
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        let Some((&first, rest)) = remaining.split_first() else {
            out.push(cur.clone());
            return;
        };
        for slot in 0..counts.len() {
            let (size, count) = counts[slot];
            if count == 0 || size - 1 > rest.len() {
                continue;
            }
            counts[slot].1 -= 1;
            for combo in combinations(rest.len(), size - 1) {
                let mut team = vec![first];
                team.extend(combo.iter().map(|&c| rest[c]));
                let others: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| combo.binary_search(idx).is_err())
                    .map(|(_, &v)| v)
                    .collect();
                cur.push(team);
                rec(&others, counts, cur, out);
                cur.pop();
            }
            counts[slot].1 += 1;
        }
    }
    if sizes.iter().sum::<usize>() != n {
        return Vec::new();
    }
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &s in sizes {
        match counts.iter_mut().find(|(size, _)| *size == s) {
            Some(entry) => entry.1 += 1,
            None => counts.push((s, 1)),
        }
    }
    counts.sort_unstable();
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    rec(&all, &mut counts, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustive {
    pub best: ScoredPartition,
    pub partitions_considered: usize,
}

/// The best partition over every partition whose team sizes follow the
/// team-count plan, each team with its optimal assignment. Ties go to the
/// lexicographically smallest list of sorted member-id lists.
pub fn brute_force_optimum(roster: &Roster, task: &Task, params: CongenialityParams) -> Result<Exhaustive> {
    let n = roster.len();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge { n, limit: EXHAUSTIVE_LIMIT });
    }
    check_inputs(roster, task, None)?;
    let plan = quantity_distribution(n, task.team_size);
    if plan.is_sentinel() {
        return Err(Error::NoPartition { n, m: task.team_size });
    }
    let eval = Evaluator::new(roster, task, params);
    let partitions = enumerate_partitions(n, &plan.sizes());
    let mut best: Option<(f64, Vec<Rc<TeamEvaluation>>)> = None;
    for p in &partitions {
        let mut evals = p.iter().map(|team| eval.team(team)).collect::<Result<Vec<_>>>()?;
        evals.sort_by(|a, b| a.team.cmp(&b.team));
        let value = objective(evals.iter().map(|e| &**e));
        let better = match &best {
            None => true,
            Some((v, cur)) => {
                value > *v || (value == *v && evals.iter().map(|e| &e.team).lt(cur.iter().map(|e| &e.team)))
            }
        };
        if better {
            best = Some((value, evals));
        }
    }
    let (_, evals) = best.expect("a non-sentinel plan has at least one partition");
    Ok(Exhaustive {
        best: ScoredPartition::from_evaluations(evals.iter().map(|e| (**e).clone()).collect()),
        partitions_considered: partitions.len(),
    })
}
