//! Dynamic time warping over positional difference vectors.
//!
//! Matches two gap signals of possibly different lengths with the classic
//! three-predecessor recursion, local cost |V1[c] - V2[d]| and no extra
//! penalty for insertions or deletions. Besides the accumulated cost the
//! optimal path is reconstructed from backpointers; downstream stages mine
//! its cells for anchor points.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::{Candidate, LexiconEntry, Stage};
use crate::posvec::{DiffVector, WordSignal};

/// Outcome of matching one pair of difference vectors.
///
/// Path cells are 1-based: (1, 1) is the first pair of gaps, (N, M) the
/// last, where N and M are the vector dimensions. Each step advances i, j
/// or both by one.
#[derive(Debug, Clone, PartialEq)]
pub struct DtwResult {
    /// Sum of local costs over the path cells.
    pub raw_cost: f64,
    /// Raw cost divided by path length; comparable across vector sizes.
    pub normalized_cost: f64,
    pub path: Vec<(usize, usize)>,
}

impl DtwResult {
    /// Checks the path invariants: starts at (1,1), ends at (n,m),
    /// monotone and continuous steps.
    pub fn path_is_valid(&self, n: usize, m: usize) -> bool {
        if self.path.first() != Some(&(1, 1)) || self.path.last() != Some(&(n, m)) {
            return false;
        }
        self.path.windows(2).all(|w| {
            let (i0, j0) = w[0];
            let (i1, j1) = w[1];
            let di = i1.wrapping_sub(i0);
            let dj = j1.wrapping_sub(j0);
            di <= 1 && dj <= 1 && di + dj >= 1
        })
    }
}

const BP_START: u8 = 0;
const BP_DIAG: u8 = 1;
const BP_FROM_I: u8 = 2;
const BP_FROM_J: u8 = 3;

/// Matches two difference vectors, unconstrained.
pub fn dtw_match(v1: &DiffVector, v2: &DiffVector) -> Result<DtwResult> {
    dtw_match_banded(v1, v2, None)
}

/// Matches two difference vectors, optionally restricting the search to a
/// diagonal band of the given half width. The band is widened to the
/// dimension difference when necessary so a path always exists.
pub fn dtw_match_banded(v1: &DiffVector, v2: &DiffVector, band: Option<usize>) -> Result<DtwResult> {
    let n = v1.dim();
    let m = v2.dim();
    if n == 0 {
        return Err(Error::EmptyDiffVector {
            word: v1.word.clone(),
        });
    }
    if m == 0 {
        return Err(Error::EmptyDiffVector {
            word: v2.word.clone(),
        });
    }

    let radius = band.map(|r| r.max(n.abs_diff(m)));
    let in_band = |i: usize, j: usize| match radius {
        None => true,
        Some(r) => i.abs_diff(j) <= r,
    };
    let local = |i: usize, j: usize| v1.values[i - 1].abs_diff(v2.values[j - 1]) as f64;

    let mut cost = vec![f64::INFINITY; n * m];
    let mut back = vec![BP_START; n * m];
    let idx = |i: usize, j: usize| (i - 1) * m + (j - 1);

    cost[idx(1, 1)] = local(1, 1);
    for i in 2..=n {
        if !in_band(i, 1) {
            continue;
        }
        cost[idx(i, 1)] = local(i, 1) + cost[idx(i - 1, 1)];
        back[idx(i, 1)] = BP_FROM_I;
    }
    for j in 2..=m {
        if !in_band(1, j) {
            continue;
        }
        cost[idx(1, j)] = local(1, j) + cost[idx(1, j - 1)];
        back[idx(1, j)] = BP_FROM_J;
    }

    for i in 2..=n {
        for j in 2..=m {
            if !in_band(i, j) {
                continue;
            }
            // Tie order: diagonal, then advance in i, then advance in j.
            let mut best = cost[idx(i - 1, j - 1)];
            let mut bp = BP_DIAG;
            let from_i = cost[idx(i - 1, j)];
            if from_i < best {
                best = from_i;
                bp = BP_FROM_I;
            }
            let from_j = cost[idx(i, j - 1)];
            if from_j < best {
                best = from_j;
                bp = BP_FROM_J;
            }
            cost[idx(i, j)] = local(i, j) + best;
            back[idx(i, j)] = bp;
        }
    }

    let raw_cost = cost[idx(n, m)];
    debug_assert!(raw_cost.is_finite());

    let mut path = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    loop {
        path.push((i, j));
        match back[idx(i, j)] {
            BP_DIAG => {
                i -= 1;
                j -= 1;
            }
            BP_FROM_I => i -= 1,
            BP_FROM_J => j -= 1,
            _ => break,
        }
    }
    path.reverse();

    let normalized_cost = raw_cost / path.len() as f64;
    Ok(DtwResult {
        raw_cost,
        normalized_cost,
        path,
    })
}

/// One candidate pair together with its matching outcome.
#[derive(Debug, Clone)]
pub struct ScoredPair {
    /// Case-folded source word.
    pub source: String,
    /// Source word as it appeared in the text.
    pub source_display: String,
    pub target: String,
    pub result: DtwResult,
}

/// Matches every candidate pair, in input order.
///
/// The hot loop of the primary stage; pairs are scored in parallel with a
/// deterministic, order-preserving merge.
pub fn score_pairs(
    pairs: &[(String, String)],
    source: &BTreeMap<String, WordSignal>,
    target: &BTreeMap<String, WordSignal>,
    band: Option<usize>,
) -> Result<Vec<ScoredPair>> {
    pairs
        .par_iter()
        .map(|(s, t)| {
            let src = source.get(s).ok_or_else(|| Error::MissingVector {
                word: s.clone(),
                side: "source",
            })?;
            let tgt = target.get(t).ok_or_else(|| Error::MissingVector {
                word: t.clone(),
                side: "target",
            })?;
            let result = dtw_match_banded(&src.diffs, &tgt.diffs, band)?;
            Ok(ScoredPair {
                source: s.clone(),
                source_display: src.display.clone(),
                target: t.clone(),
                result,
            })
        })
        .collect()
}

/// Thresholds scored pairs into the primary lexicon.
///
/// Per source word, keeps up to `top_n` targets whose normalized cost is
/// at or below `threshold`, ranked ascending by cost with lexicographic
/// target as a deterministic tiebreak.
pub fn select_primary(scored: &[ScoredPair], threshold: f64, top_n: usize) -> Vec<LexiconEntry> {
    let mut grouped: BTreeMap<&str, (&str, Vec<(&str, f64)>)> = BTreeMap::new();
    for sp in scored {
        if sp.result.normalized_cost <= threshold {
            grouped
                .entry(&sp.source)
                .or_insert_with(|| (sp.source_display.as_str(), Vec::new()))
                .1
                .push((&sp.target, sp.result.normalized_cost));
        }
    }
    grouped
        .into_values()
        .map(|(display, mut candidates)| {
            candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
            candidates.truncate(top_n);
            LexiconEntry {
                source_word: display.to_string(),
                stage: Stage::Primary,
                candidates: candidates
                    .into_iter()
                    .enumerate()
                    .map(|(k, (target, score))| Candidate {
                        target_word: target.to_string(),
                        score,
                        rank: k + 1,
                        t: None,
                    })
                    .collect(),
            }
        })
        .collect()
}
