//! Anchor-point extraction and text segmentation.
//!
//! The warp paths of all primary-lexicon pairs are pooled into a cloud of
//! (source offset, target offset) points. A greedy scan keeps only points
//! that sit near the global diagonal, advance monotonically on both axes,
//! respect a minimum source spacing and never jump too far on the target
//! axis. The survivors jointly cut both texts into the same number of
//! parallel segments.

use crate::corpus::PositionVector;
use crate::dtw::ScoredPair;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// A candidate correspondence between token offsets of the two texts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathPoint {
    /// Source-text token offset.
    pub i: usize,
    /// Target-text token offset.
    pub j: usize,
}

/// Anchor points ordered by source offset, non-decreasing on both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorSet {
    points: Vec<PathPoint>,
}

impl AnchorSet {
    /// Validates that points never decrease on either axis. Equal
    /// consecutive coordinates are allowed; they mark one-sided noise
    /// spans during segmentation.
    pub fn new(points: Vec<PathPoint>) -> Result<Self> {
        for (index, w) in points.windows(2).enumerate() {
            if w[1].i < w[0].i || w[1].j < w[0].j {
                return Err(Error::NonMonotoneAnchors {
                    index: index + 1,
                    i: w[1].i,
                    j: w[1].j,
                    prev_i: w[0].i,
                    prev_j: w[0].j,
                });
            }
        }
        Ok(AnchorSet { points })
    }

    pub fn points(&self) -> &[PathPoint] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when both coordinates strictly increase, as the noise filter
    /// guarantees for its output.
    pub fn is_strictly_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].i > w[0].i && w[1].j > w[0].j)
    }
}

/// Knobs of the anchor noise filter.
#[derive(Debug, Clone, Copy)]
pub struct AnchorConfig {
    /// Half width of the diagonal acceptance band, as a fraction of the
    /// target text length.
    pub slope_band_fraction: f64,
    /// Minimum source-offset spacing between kept points.
    pub min_gap_source: usize,
    /// Maximum target-offset jump between kept points.
    pub max_jump_target: usize,
}

/// Maps the warp-path cells of the given pairs back to token offsets.
///
/// Path cell (a, b) of a pair becomes the point (positions1[a],
/// positions2[b]): each gap is anchored at the occurrence that closes it.
/// Points are emitted pair by pair, duplicates retained.
pub fn collect_path_points(
    pairs: &[&ScoredPair],
    source_positions: &BTreeMap<String, PositionVector>,
    target_positions: &BTreeMap<String, PositionVector>,
) -> Result<Vec<PathPoint>> {
    let mut points = Vec::new();
    for pair in pairs {
        let src = source_positions
            .get(&pair.source)
            .ok_or_else(|| Error::MissingVector {
                word: pair.source.clone(),
                side: "source",
            })?;
        let tgt = target_positions
            .get(&pair.target)
            .ok_or_else(|| Error::MissingVector {
                word: pair.target.clone(),
                side: "target",
            })?;
        for &(a, b) in &pair.result.path {
            points.push(PathPoint {
                i: src.positions[a],
                j: tgt.positions[b],
            });
        }
    }
    Ok(points)
}

/// Outcome of the noise filter including the per-point keep decisions,
/// aligned with the sorted point order.
#[derive(Debug, Clone)]
pub struct AnchorScan {
    pub sorted_points: Vec<PathPoint>,
    pub kept: Vec<bool>,
    pub anchors: AnchorSet,
}

/// Greedy left-to-right scan keeping only reliable points.
///
/// Points are sorted by (i, j). A point is kept iff it lies within the
/// diagonal band and, relative to the previously kept point, advances the
/// source offset by at least the minimum gap, strictly advances the target
/// offset, and does not jump the target offset beyond the maximum. The
/// result strictly increases on both axes by construction.
pub fn filter_anchor_points(
    points: &[PathPoint],
    cfg: &AnchorConfig,
    source_len: usize,
    target_len: usize,
) -> AnchorScan {
    let mut sorted_points = points.to_vec();
    sorted_points.sort_unstable();

    let slope = if source_len == 0 {
        0.0
    } else {
        target_len as f64 / source_len as f64
    };
    let band = cfg.slope_band_fraction * target_len as f64;
    let min_gap = cfg.min_gap_source.max(1);

    let mut kept = Vec::with_capacity(sorted_points.len());
    let mut anchors = Vec::new();
    let mut prev: Option<PathPoint> = None;
    for p in &sorted_points {
        let on_diagonal = (p.j as f64 - p.i as f64 * slope).abs() <= band;
        let keep = on_diagonal
            && match prev {
                None => true,
                Some(q) => {
                    p.i >= q.i + min_gap && p.j > q.j && p.j - q.j <= cfg.max_jump_target
                }
            };
        kept.push(keep);
        if keep {
            anchors.push(*p);
            prev = Some(*p);
        }
    }

    let anchors = AnchorSet::new(anchors).expect("greedy scan output is monotone");
    debug_assert!(anchors.is_strictly_monotone());
    AnchorScan {
        sorted_points,
        kept,
        anchors,
    }
}

/// Parallel segmentation of both texts induced by an anchor set.
///
/// Segment k covers the offsets after cut k-1 up to and including cut k;
/// segment 0 starts at the text start and the final segment runs to the
/// text end. Both sides always have the same number of segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    source_cuts: Vec<usize>,
    target_cuts: Vec<usize>,
    source_len: usize,
    target_len: usize,
}

impl Segmentation {
    pub fn segment_count(&self) -> usize {
        self.source_cuts.len() + 1
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn source_cuts(&self) -> &[usize] {
        &self.source_cuts
    }

    pub fn target_cuts(&self) -> &[usize] {
        &self.target_cuts
    }

    /// Segment index of a source-text offset.
    pub fn source_segment_of(&self, offset: usize) -> usize {
        self.source_cuts.partition_point(|&c| c < offset)
    }

    /// Segment index of a target-text offset.
    pub fn target_segment_of(&self, offset: usize) -> usize {
        self.target_cuts.partition_point(|&c| c < offset)
    }

    /// Source offsets of segment k as a half-open range.
    pub fn source_span(&self, k: usize) -> Result<std::ops::Range<usize>> {
        Self::span(&self.source_cuts, self.source_len, k)
    }

    /// Target offsets of segment k as a half-open range.
    pub fn target_span(&self, k: usize) -> Result<std::ops::Range<usize>> {
        Self::span(&self.target_cuts, self.target_len, k)
    }

    fn span(cuts: &[usize], len: usize, k: usize) -> Result<std::ops::Range<usize>> {
        let count = cuts.len() + 1;
        if k >= count {
            return Err(Error::SegmentOutOfRange { index: k, count });
        }
        let start = if k == 0 { 0 } else { cuts[k - 1] + 1 };
        let end = if k == cuts.len() { len } else { cuts[k] + 1 };
        Ok(start..end.max(start))
    }

    /// Flags segments that are degenerate on either side: an empty span,
    /// or an interior span holding nothing but its own anchor token. Such
    /// a segment marks text present in only one language.
    pub fn noise_flags(&self) -> Vec<bool> {
        let count = self.segment_count();
        if count == 1 {
            return vec![false];
        }
        (0..count)
            .map(|k| {
                let s = self.source_span(k).expect("k in range");
                let t = self.target_span(k).expect("k in range");
                s.len() <= 1 || t.len() <= 1
            })
            .collect()
    }
}

/// Cuts both texts at the anchor coordinates.
///
/// Anchors must be monotone and inside the text bounds. Zero anchors
/// degrade to a single segment covering each whole text.
pub fn segment_texts(
    anchors: &AnchorSet,
    source_len: usize,
    target_len: usize,
) -> Result<Segmentation> {
    if let Some(last) = anchors.points().last() {
        if last.i >= source_len {
            return Err(Error::PositionOutOfBounds {
                side: "source",
                position: last.i,
                len: source_len,
            });
        }
        if last.j >= target_len {
            return Err(Error::PositionOutOfBounds {
                side: "target",
                position: last.j,
                len: target_len,
            });
        }
    }
    Ok(Segmentation {
        source_cuts: anchors.points().iter().map(|p| p.i).collect(),
        target_cuts: anchors.points().iter().map(|p| p.j).collect(),
        source_len,
        target_len,
    })
}
