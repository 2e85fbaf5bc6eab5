//! Team composition for repeated instances of one task.
//!
//! A roster of agents (personality profile, gender, competence levels) is
//! split into teams whose sizes stay within one of a target size `m`. Each
//! team is scored by a synergistic value that blends competence proficiency,
//! obtained from an optimal min-cost-flow competence assignment, with a
//! personality and gender congeniality term. The partition objective is the
//! product of team values, which is searched by annealed pairwise team
//! crossover.
//!
//! Module map:
//!
//! - [`model`]: agents, task types, rosters, questionnaire scoring, validation
//! - [`congeniality`]: the personality / gender utility of a team
//! - [`flow`]: a small min-cost-flow solver with arc lower bounds
//! - [`assignment`]: competence assignment network, solver, proficiency
//! - [`partition`]: team-size plans, partition validity, team and partition values
//! - [`synteam`]: random initial partition, annealed crossover, exhaustive oracle
//! - [`ranking`]: partial rankings and the Kendall distance with ties
//! - [`cli`]: file formats and the command implementations behind the binary

pub mod assignment;
pub mod cli;
pub mod congeniality;
pub mod error;
pub mod flow;
pub mod model;
pub mod partition;
pub mod ranking;
pub mod synteam;

pub use error::{Error, Result, Violation};
