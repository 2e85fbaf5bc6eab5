//! Competence levels from school subject marks.
//!
//! Each intelligence level is the mean mark over the subjects the matrix
//! marks as relevant for it, divided by 10.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

pub const SUBJECTS: [&str; 10] = [
    "Catalan",
    "Spanish",
    "English",
    "Nature",
    "Physics and Chemistry",
    "Social Science",
    "Math",
    "Physical Education",
    "Plastic Arts",
    "Technology",
];

pub const INTELLIGENCES: [&str; 8] = [
    "Naturalist",
    "Interpersonal",
    "Logical/Mathematical",
    "Visual/Spatial",
    "Body/Kinaesthetic",
    "Musical",
    "Intrapersonal",
    "Verbal/Linguistic",
];

pub const MAX_MARK: f64 = 10.0;

/// Subject-by-intelligence relevance matrix (rows follow [`SUBJECTS`],
/// columns follow [`INTELLIGENCES`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntelligenceMatrix(pub [[u8; 8]; 10]);

impl Default for IntelligenceMatrix {
    fn default() -> Self {
        Self([
            [0, 1, 0, 0, 0, 0, 1, 1],
            [0, 1, 0, 1, 0, 1, 1, 1],
            [0, 1, 0, 0, 0, 1, 1, 1],
            [1, 1, 0, 1, 1, 0, 1, 1],
            [1, 1, 1, 1, 0, 0, 1, 1],
            [1, 1, 0, 0, 0, 0, 1, 1],
            [0, 1, 1, 1, 0, 0, 1, 1],
            [0, 1, 0, 1, 1, 0, 1, 1],
            [0, 1, 0, 1, 1, 0, 1, 0],
            [1, 1, 1, 0, 1, 0, 1, 1],
        ])
    }
}

impl IntelligenceMatrix {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (r, row) in self.0.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    out.push(Violation::new("matrix", format!("[{r}][{c}]"), format!("entry {v} is not 0 or 1")));
                }
            }
        }
        out
    }

    /// Subjects relevant to intelligence column `col`.
    pub fn subjects_for(&self, col: usize) -> impl Iterator<Item = &'static str> + '_ {
        SUBJECTS
            .iter()
            .zip(self.0.iter())
            .filter(move |(_, row)| row[col] == 1)
            .map(|(s, _)| *s)
    }
}

pub fn derive_competences(marks: &BTreeMap<String, f64>, matrix: &IntelligenceMatrix) -> Result<BTreeMap<String, f64>> {
    let mut violations = matrix.validate();
    for subject in SUBJECTS {
        match marks.get(subject) {
            None => violations.push(Violation::new("marks", subject, "missing subject mark")),
            Some(v) if !(0.0..=MAX_MARK).contains(v) => {
                violations.push(Violation::new("marks", subject, format!("mark {v} outside [0, {MAX_MARK}]")))
            }
            Some(_) => {}
        }
    }
    for subject in marks.keys() {
        if !SUBJECTS.contains(&subject.as_str()) {
            violations.push(Violation::new("marks", subject, "unknown subject"));
        }
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(INTELLIGENCES
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let relevant: Vec<f64> = matrix.subjects_for(col).map(|s| marks[s]).collect();
            let level = if relevant.is_empty() {
                0.0
            } else {
                relevant.iter().sum::<f64>() / relevant.len() as f64 / MAX_MARK
            };
            (name.to_string(), level)
        })
        .collect())
}
