//! Team congeniality: personality diversity plus gender balance.
//!
//! ```text
//! u_con(K) = σ_SN·σ_TF
//!          + max_i max(α·(tf_i + ei_i + pj_i), 0)
//!          + max_i max(-β·ei_i, 0)
//!          + γ·sin(π·g(K))
//! ```
//!
//! with `α = σ_SN·σ_TF / 3`, `β = 3α` recomputed for every team, σ the
//! population standard deviation over the team, and `g(K)` the fraction of
//! women in the team.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentProfile, Gender};

pub const DEFAULT_GAMMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CongenialityParams {
    /// Weight of the gender-balance term, in `[0, 1]`.
    pub gamma: f64,
}

impl CongenialityParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::single("params", "gamma", format!("{gamma} outside [0, 1]")));
        }
        Ok(Self { gamma })
    }
}

impl Default for CongenialityParams {
    fn default() -> Self {
        Self { gamma: DEFAULT_GAMMA }
    }
}

/// Population standard deviation of `values`.
pub fn trait_dispersion(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::contract(format!(
            "dispersion needs at least two values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt())
}

/// Fraction of women in the team.
pub fn gender_ratio(team: &[&AgentProfile]) -> f64 {
    let women = team.iter().filter(|a| a.gender == Gender::Woman).count();
    women as f64 / team.len() as f64
}

/// `sin(π·g)`, pinned to exactly zero for single-gender teams.
fn balance(g: f64) -> f64 {
    if g <= 0.0 || g >= 1.0 {
        0.0
    } else {
        (PI * g).sin()
    }
}

pub fn congeniality(team: &[&AgentProfile], params: CongenialityParams) -> Result<f64> {
    if team.len() < 2 {
        return Err(Error::contract(format!(
            "congeniality needs a team of at least two, got {}",
            team.len()
        )));
    }
    let sn: Vec<f64> = team.iter().map(|a| a.personality.sn).collect();
    let tf: Vec<f64> = team.iter().map(|a| a.personality.tf).collect();
    let diversity = trait_dispersion(&sn)? * trait_dispersion(&tf)?;
    let alpha = diversity / 3.0;
    let beta = 3.0 * alpha;

    let etj = team
        .iter()
        .map(|a| {
            let p = &a.personality;
            (alpha * (p.tf + p.ei + p.pj)).max(0.0)
        })
        .fold(0.0, f64::max);
    let introvert = team
        .iter()
        .map(|a| (-beta * a.personality.ei).max(0.0))
        .fold(0.0, f64::max);
    let gender = params.gamma * balance(gender_ratio(team));

    Ok(diversity + etj + introvert + gender)
}
