//! Binary segment vectors and their correlation scores.
//!
//! Words too rare for warp matching are represented by which segments of
//! the segmentation they occur in. Pairs are scored by mutual information
//! over segment occupancy and admitted only when a t-score says the
//! co-occurrence is reliable.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::anchors::Segmentation;
use crate::corpus::PositionVector;
use crate::error::{Error, Result};
use crate::lexicon::{Candidate, LexiconEntry, Stage};

/// Which half of the corpus a position vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Fixed-length bit vector over segments; bit k is set iff the word
/// occurs somewhere in segment k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryVector {
    pub word: String,
    pub display: String,
    blocks: Vec<u64>,
    len: usize,
    ones: u32,
}

impl BinaryVector {
    /// Builds a vector of `len` bits with the given indices set.
    pub fn from_segments<I>(word: &str, display: &str, indices: I, len: usize) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut blocks = vec![0u64; len.div_ceil(64)];
        for k in indices {
            if k >= len {
                return Err(Error::SegmentOutOfRange {
                    index: k,
                    count: len,
                });
            }
            blocks[k / 64] |= 1u64 << (k % 64);
        }
        let ones = blocks.iter().map(|b| b.count_ones()).sum();
        Ok(BinaryVector {
            word: word.to_string(),
            display: display.to_string(),
            blocks,
            len,
            ones,
        })
    }

    /// Number of segments (vector dimension).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of occupied segments.
    pub fn ones(&self) -> u32 {
        self.ones
    }

    pub fn get(&self, k: usize) -> bool {
        k < self.len && self.blocks[k / 64] >> (k % 64) & 1 == 1
    }

    /// Indices of the occupied segments, ascending.
    pub fn set_indices(&self) -> Vec<usize> {
        (0..self.len).filter(|&k| self.get(k)).collect()
    }

    /// Number of segments occupied by both vectors.
    pub fn overlap(&self, other: &BinaryVector) -> Result<u32> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones())
            .sum())
    }
}

/// Projects a position vector onto the segmentation of its side.
pub fn binary_vector(
    p: &PositionVector,
    seg: &Segmentation,
    side: Side,
) -> Result<BinaryVector> {
    let (len, segment_of): (usize, &dyn Fn(usize) -> usize) = match side {
        Side::Source => (seg.source_len(), &|o| seg.source_segment_of(o)),
        Side::Target => (seg.target_len(), &|o| seg.target_segment_of(o)),
    };
    let side_name = match side {
        Side::Source => "source",
        Side::Target => "target",
    };
    let mut indices = Vec::with_capacity(p.count());
    for &pos in &p.positions {
        if pos >= len {
            return Err(Error::PositionOutOfBounds {
                side: side_name,
                position: pos,
                len,
            });
        }
        indices.push(segment_of(pos));
    }
    BinaryVector::from_segments(&p.word, &p.display, indices, seg.segment_count())
}

/// Mutual information of two segment vectors, in bits.
///
/// With o occupied segments in common out of L, this is
/// log2((o/L) / ((ones_a/L)(ones_b/L))); negative infinity when the
/// vectors share no segment.
pub fn mutual_info(a: &BinaryVector, b: &BinaryVector) -> Result<f64> {
    let o = a.overlap(b)?;
    if o == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let l = a.len() as f64;
    let joint = o as f64 / l;
    let pa = a.ones() as f64 / l;
    let pb = b.ones() as f64 / l;
    Ok((joint / (pa * pb)).log2())
}

/// Confidence that the co-occurrence is not chance:
/// (Pr(a,b) - Pr(a)Pr(b)) / sqrt(Pr(a,b)/L).
///
/// Undefined when the vectors share no segment; such pairs are rejected
/// before scoring.
pub fn t_score(a: &BinaryVector, b: &BinaryVector) -> Result<f64> {
    let o = a.overlap(b)?;
    if o == 0 {
        return Err(Error::UndefinedScore);
    }
    let l = a.len() as f64;
    let joint = o as f64 / l;
    let pa = a.ones() as f64 / l;
    let pb = b.ones() as f64 / l;
    Ok((joint - pa * pb) / (joint / l).sqrt())
}

/// Scores every source word against every target word and keeps, per
/// source word, up to `top_n` targets whose t-score clears the threshold,
/// ranked by descending mutual information.
///
/// Source words in `exclude` (the primary lexicon) are never emitted.
pub fn select_secondary(
    source: &BTreeMap<String, BinaryVector>,
    target: &BTreeMap<String, BinaryVector>,
    t_threshold: f64,
    top_n: usize,
    exclude: &BTreeSet<String>,
) -> Vec<LexiconEntry> {
    let sources: Vec<&BinaryVector> = source
        .values()
        .filter(|v| !exclude.contains(&v.word))
        .collect();
    sources
        .par_iter()
        .filter_map(|src| {
            let mut candidates: Vec<(&str, f64, f64)> = target
                .values()
                .filter_map(|tgt| {
                    let o = src.overlap(tgt).ok()?;
                    if o == 0 {
                        return None;
                    }
                    let t = t_score(src, tgt).expect("overlap > 0");
                    if t <= t_threshold {
                        return None;
                    }
                    let m = mutual_info(src, tgt).expect("dimensions match");
                    Some((tgt.word.as_str(), m, t))
                })
                .collect();
            if candidates.is_empty() {
                return None;
            }
            candidates.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then_with(|| b.2.total_cmp(&a.2))
                    .then_with(|| a.0.cmp(b.0))
            });
            candidates.truncate(top_n);
            Some(LexiconEntry {
                source_word: src.display.clone(),
                stage: Stage::Secondary,
                candidates: candidates
                    .into_iter()
                    .enumerate()
                    .map(|(k, (target_word, m, t))| Candidate {
                        target_word: target_word.to_string(),
                        score: m,
                        rank: k + 1,
                        t: Some(t),
                    })
                    .collect(),
            })
        })
        .collect()
}
