//! Partial rankings (orderings with ties) and the Kendall distance between
//! them with tie penalty `p`.
//!
//! For every unordered pair of items the distance charges 1 if the two
//! rankings order the pair in opposite strict directions, `p` if the pair is
//! tied in exactly one ranking, and 0 otherwise. The total is divided by
//! `n(n-1)/2`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_TIE_PENALTY: f64 = 0.5;
pub const DEFAULT_DIGITS: u32 = 2;

/// Buckets of ids, best bucket first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PartialRanking {
    buckets: Vec<BTreeSet<String>>,
}

impl PartialRanking {
    pub fn new(buckets: Vec<BTreeSet<String>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, b) in buckets.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::single("ranking", format!("buckets[{i}]"), "empty bucket"));
            }
            for id in b {
                if !seen.insert(id) {
                    return Err(Error::single("ranking", format!("buckets[{i}]"), format!("{id:?} ranked twice")));
                }
            }
        }
        Ok(Self { buckets })
    }

    /// Strict ranking, one id per bucket.
    pub fn strict<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(ids.into_iter().map(|id| BTreeSet::from([id.into()])).collect())
    }

    pub fn buckets(&self) -> &[BTreeSet<String>] {
        &self.buckets
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Id to bucket position.
    pub fn positions(&self) -> BTreeMap<&str, usize> {
        self.buckets
            .iter()
            .enumerate()
            .flat_map(|(pos, b)| b.iter().map(move |id| (id.as_str(), pos)))
            .collect()
    }
}

/// `x` rounded to `digits` decimals with ties to even, as an integer count
/// of `10^-digits` units.
fn rounded_units(x: f64, digits: u32) -> i64 {
    (x * 10f64.powi(digits as i32)).round_ties_even() as i64
}

/// Rounds every score to `digits` decimals and groups equal rounded scores
/// into buckets, highest score first.
pub fn ranking_from_scores(scores: &BTreeMap<String, f64>, digits: u32) -> Result<PartialRanking> {
    if scores.is_empty() {
        return Err(Error::single("scores", "values", "no scores to rank"));
    }
    if let Some((id, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::single("scores", id, format!("non-finite score {v}")));
    }
    let mut groups: BTreeMap<i64, BTreeSet<String>> = BTreeMap::new();
    for (id, &v) in scores {
        groups.entry(rounded_units(v, digits)).or_default().insert(id.clone());
    }
    PartialRanking::new(groups.into_values().rev().collect())
}

/// Kendall distance with tie penalty, normalised to `[0, 1]`.
///
/// Runs in `O(n log n)`: pairs tied in each ranking are counted from bucket
/// sizes, and strictly discordant pairs are the strict inversions of the
/// second ranking's positions after sorting by `(first position, second
/// position)`.
pub fn kendall_tau_partial(r1: &PartialRanking, r2: &PartialRanking, tie_penalty: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tie_penalty) {
        return Err(Error::single("ranking", "tie_penalty", format!("{tie_penalty} outside [0, 1]")));
    }
    let p1 = r1.positions();
    let p2 = r2.positions();
    if p1.len() != p2.len() || p1.keys().ne(p2.keys()) {
        return Err(Error::single("ranking", "ids", "rankings cover different id sets"));
    }
    let n = p1.len();
    if n < 2 {
        return Err(Error::single("ranking", "ids", "at least two ranked ids are required"));
    }

    let mut pairs: Vec<(usize, usize)> = p1.iter().map(|(id, &a)| (a, p2[id])).collect();
    pairs.sort_unstable();

    let tied_pairs = |counts: &mut dyn Iterator<Item = usize>| -> u64 {
        counts.map(|c| (c * c.saturating_sub(1) / 2) as u64).sum()
    };
    let tied1 = tied_pairs(&mut r1.buckets.iter().map(BTreeSet::len));
    let tied2 = tied_pairs(&mut r2.buckets.iter().map(BTreeSet::len));
    let mut both: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &pair in &pairs {
        *both.entry(pair).or_default() += 1;
    }
    let tied_both = tied_pairs(&mut both.values().copied());

    let mut second: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
    let discordant = count_inversions(&mut second);

    let tied_in_one = (tied1 - tied_both) + (tied2 - tied_both);
    let total = (n * (n - 1) / 2) as f64;
    Ok((discordant as f64 + tie_penalty * tied_in_one as f64) / total)
}

/// Number of pairs `i < j` with `v[i] > v[j]`; sorts `v` as a side effect.
fn count_inversions(v: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[i] <= v[j] {
            merged.push(v[i]);
            i += 1;
        } else {
            merged.push(v[j]);
            count += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    count
}
