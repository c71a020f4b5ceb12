//! Readers and writers for the lexicon and diagnostic dump formats.
//!
//! Everything here is deterministic: the same data always renders to the
//! same bytes, and parsing an emitted file reproduces the data it came
//! from at the written precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::anchors::{AnchorScan, AnchorSet, PathPoint, Segmentation};
use crate::binvec::BinaryVector;
use crate::dtw::{DtwResult, ScoredPair};
use crate::error::{Error, Result};
use crate::lexicon::{Candidate, LexiconEntry, Stage};
use crate::posvec::WordSignal;

pub const LEXICON_HEADER: &str = "stage\tsource_word\trank\ttarget_word\tscore\tscore_type\tt";

/// Renders the merged lexicon as TSV, one candidate per row.
pub fn write_lexicon_tsv(entries: &[LexiconEntry]) -> String {
    let mut out = String::from(LEXICON_HEADER);
    out.push('\n');
    for entry in entries {
        for c in &entry.candidates {
            let t = c.t.map(|t| format!("{t:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}",
                entry.stage,
                entry.source_word,
                c.rank,
                c.target_word,
                c.score,
                entry.stage.score_type(),
                t
            );
        }
    }
    out
}

fn format_err(path: &Path, what: &'static str, line: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        what,
        line,
        reason: reason.into(),
    }
}

/// Parses a lexicon TSV back into entries. Consecutive rows sharing stage
/// and source word form one entry; ranks must be contiguous from 1.
pub fn parse_lexicon_tsv(text: &str, path: &Path) -> Result<Vec<LexiconEntry>> {
    let mut entries: Vec<LexiconEntry> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 {
            if line != LEXICON_HEADER {
                return Err(format_err(path, "lexicon", 1, "unexpected header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(format_err(
                path,
                "lexicon",
                k + 1,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let stage: Stage = fields[0]
            .parse()
            .map_err(|e: String| format_err(path, "lexicon", k + 1, e))?;
        let source_word = fields[1].to_string();
        let rank: usize = fields[2]
            .parse()
            .map_err(|_| format_err(path, "lexicon", k + 1, "bad rank"))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| format_err(path, "lexicon", k + 1, "bad score"))?;
        let t = if fields[6].is_empty() {
            None
        } else {
            Some(
                fields[6]
                    .parse()
                    .map_err(|_| format_err(path, "lexicon", k + 1, "bad t"))?,
            )
        };
        let candidate = Candidate {
            target_word: fields[3].to_string(),
            score,
            rank,
            t,
        };

        let start_new = entries
            .last()
            .map(|e: &LexiconEntry| e.stage != stage || e.source_word != source_word)
            .unwrap_or(true);
        if start_new {
            if rank != 1 {
                return Err(format_err(path, "lexicon", k + 1, "entry must start at rank 1"));
            }
            entries.push(LexiconEntry {
                source_word,
                stage,
                candidates: vec![candidate],
            });
        } else {
            let entry = entries.last_mut().unwrap();
            if rank != entry.candidates.len() + 1 {
                return Err(format_err(path, "lexicon", k + 1, "ranks must be contiguous"));
            }
            entry.candidates.push(candidate);
        }
    }
    Ok(entries)
}

/// Parses a gold file: `source<TAB>target` rows, multiple rows per source
/// allowed. Source words are case-folded.
pub fn parse_gold_tsv(text: &str, path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let source = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| format_err(path, "gold", k + 1, "missing source word"))?;
        let target = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| format_err(path, "gold", k + 1, "missing target word"))?;
        map.entry(source.to_lowercase())
            .or_default()
            .insert(target.to_string());
    }
    Ok(map)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' if field.is_empty() => quoted = true,
            ',' if !quoted => {
                fields.push(std::mem::take(&mut field));
            }
            c => field.push(c),
        }
    }
    fields.push(field);
    fields
}

/// Per-word gap signals: `word,index,gap` rows.
pub fn write_signals_csv(signals: &BTreeMap<String, WordSignal>) -> String {
    let mut out = String::from("word,index,gap\n");
    for signal in signals.values() {
        for (index, gap) in signal.diffs.values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", csv_field(&signal.word), index, gap);
        }
    }
    out
}

/// Index of scored pairs referenced by the path dump.
pub fn write_pairs_csv(pairs: &[ScoredPair]) -> String {
    let mut out = String::from("pair_id,source,display,target,raw_cost,normalized_cost\n");
    for (id, p) in pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            id,
            csv_field(&p.source),
            csv_field(&p.source_display),
            csv_field(&p.target),
            p.result.raw_cost,
            p.result.normalized_cost
        );
    }
    out
}

/// Warp path cells: `pair_id,step,i,j` rows.
pub fn write_paths_csv(pairs: &[ScoredPair]) -> String {
    let mut out = String::from("pair_id,step,i,j\n");
    for (id, p) in pairs.iter().enumerate() {
        for (step, &(i, j)) in p.result.path.iter().enumerate() {
            let _ = writeln!(out, "{id},{step},{i},{j}");
        }
    }
    out
}

/// Rebuilds scored pairs from the pair index and path dump.
pub fn parse_pairs_and_paths(
    pairs_text: &str,
    paths_text: &str,
    path: &Path,
) -> Result<Vec<ScoredPair>> {
    let mut pairs: Vec<ScoredPair> = Vec::new();
    for (k, line) in pairs_text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_line(line);
        if fields.len() != 6 {
            return Err(format_err(path, "pairs", k + 1, "expected 6 fields"));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| format_err(path, "pairs", k + 1, "bad pair_id"))?;
        if id != pairs.len() {
            return Err(format_err(path, "pairs", k + 1, "pair_id out of order"));
        }
        let raw_cost: f64 = fields[4]
            .parse()
            .map_err(|_| format_err(path, "pairs", k + 1, "bad raw_cost"))?;
        let normalized_cost: f64 = fields[5]
            .parse()
            .map_err(|_| format_err(path, "pairs", k + 1, "bad normalized_cost"))?;
        pairs.push(ScoredPair {
            source: fields[1].clone(),
            source_display: fields[2].clone(),
            target: fields[3].clone(),
            result: DtwResult {
                raw_cost,
                normalized_cost,
                path: Vec::new(),
            },
        });
    }
    for (k, line) in paths_text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format_err(path, "paths", k + 1, "expected 4 fields"));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| format_err(path, "paths", k + 1, "bad pair_id"))?;
        let i: usize = fields[2]
            .parse()
            .map_err(|_| format_err(path, "paths", k + 1, "bad i"))?;
        let j: usize = fields[3]
            .parse()
            .map_err(|_| format_err(path, "paths", k + 1, "bad j"))?;
        let pair = pairs
            .get_mut(id)
            .ok_or_else(|| format_err(path, "paths", k + 1, "unknown pair_id"))?;
        pair.result.path.push((i, j));
    }
    Ok(pairs)
}

/// Anchor scatter: `i,j,kept` rows over the sorted point cloud.
pub fn write_anchor_csv(scan: &AnchorScan) -> String {
    let mut out = String::from("i,j,kept\n");
    for (p, &kept) in scan.sorted_points.iter().zip(&scan.kept) {
        let _ = writeln!(out, "{},{},{}", p.i, p.j, kept as u8);
    }
    out
}

/// Reads back the kept anchors of a scatter dump.
pub fn parse_anchor_csv(text: &str, path: &Path) -> Result<AnchorSet> {
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format_err(path, "anchors", k + 1, "expected 3 fields"));
        }
        let kept = fields[2] == "1";
        if !kept {
            continue;
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| format_err(path, "anchors", k + 1, "bad i"))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| format_err(path, "anchors", k + 1, "bad j"))?;
        points.push(PathPoint { i, j });
    }
    AnchorSet::new(points)
}

/// Segment table with half-open offset ranges and the noise flag.
pub fn write_segments_tsv(seg: &Segmentation) -> String {
    let mut out = String::from("segment\tsource_start\tsource_end\ttarget_start\ttarget_end\tnoise\n");
    let flags = seg.noise_flags();
    for k in 0..seg.segment_count() {
        let s = seg.source_span(k).expect("k in range");
        let t = seg.target_span(k).expect("k in range");
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            k, s.start, s.end, t.start, t.end, flags[k] as u8
        );
    }
    out
}

/// Per-word occupied segment sets: `word<TAB>k1,k2,...`.
pub fn write_binvec_tsv(vectors: &BTreeMap<String, BinaryVector>) -> String {
    let mut out = String::from("word\tsegments\n");
    for v in vectors.values() {
        let indices: Vec<String> = v.set_indices().iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "{}\t{}", v.word, indices.join(","));
    }
    out
}

/// Static SVG scatter of the anchor cloud: discarded points gray, kept
/// anchors black.
pub fn write_anchor_svg(scan: &AnchorScan, source_len: usize, target_len: usize) -> String {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 40.0;
    let scale_x = (SIZE - 2.0 * MARGIN) / source_len.max(1) as f64;
    let scale_y = (SIZE - 2.0 * MARGIN) / target_len.max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        SIZE - 2.0 * MARGIN,
        SIZE - 2.0 * MARGIN
    );
    // Discarded first so kept anchors draw on top.
    for round in 0..2 {
        let want_kept = round == 1;
        for (p, &kept) in scan.sorted_points.iter().zip(&scan.kept) {
            if kept != want_kept {
                continue;
            }
            let cx = MARGIN + p.i as f64 * scale_x;
            let cy = SIZE - MARGIN - p.j as f64 * scale_y;
            let (r, fill) = if kept { (2.0, "black") } else { (1.0, "#bbbbbb") };
            let _ = writeln!(
                out,
                "  <circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{r}\" fill=\"{fill}\"/>"
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
