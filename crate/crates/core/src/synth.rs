//! Synthetic noisy parallel corpus generator with known ground truth.
//!
//! Fabricates two token streams in which planted translation pairs occupy
//! positions related by a piecewise-linear monotone warp with bounded
//! jitter, while blocks of filler text are inserted into the target side
//! only. Everything is driven by a seeded RNG, so a fixture is fully
//! reproducible, and the generator records the planted pairs and the true
//! warp curve for evaluation.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusSide, TaggedToken};
use crate::error::{Error, Result};

/// Parameters of a synthetic fixture.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    /// Token count of each side.
    pub tokens: usize,
    /// Number of planted translation pairs.
    pub pairs: usize,
    /// Fraction of planted pairs given high occurrence counts.
    pub high_fraction: f64,
    /// Maximum absolute positional jitter applied to planted target
    /// occurrences, in tokens.
    pub jitter: usize,
    /// Fraction of the target side occupied by one-sided noise blocks.
    pub noise_fraction: f64,
    /// Number of linear spans in the base warp.
    pub warp_spans: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            tokens: 100_000,
            pairs: 200,
            high_fraction: 0.75,
            jitter: 15,
            noise_fraction: 0.05,
            warp_spans: 8,
        }
    }
}

/// Frequency class of a planted pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Count in 10..=40; recoverable by warp matching.
    HighFrequency,
    /// Count in 3..=6; recoverable only via segment vectors.
    LowFrequency,
}

/// One planted translation with its exact occurrence count.
#[derive(Debug, Clone)]
pub struct PlantedPair {
    pub source_word: String,
    pub target_word: String,
    pub count: usize,
    pub kind: PairKind,
}

/// The true source-to-target alignment curve, a monotone polyline.
/// One-sided noise blocks appear as vertical jumps.
#[derive(Debug, Clone)]
pub struct WarpMap {
    nodes: Vec<(f64, f64)>,
}

impl WarpMap {
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Target coordinate of a source offset. At a vertical jump the upper
    /// branch is used.
    pub fn map(&self, p: usize) -> usize {
        let x = p as f64;
        let idx = self.nodes.partition_point(|n| n.0 <= x);
        if idx == 0 {
            return self.nodes[0].1.round() as usize;
        }
        if idx == self.nodes.len() {
            return self.nodes[self.nodes.len() - 1].1.round() as usize;
        }
        let (x0, y0) = self.nodes[idx - 1];
        let (x1, y1) = self.nodes[idx];
        if x1 <= x0 {
            return y1.round() as usize;
        }
        (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).round() as usize
    }

    /// Euclidean distance from a point to the alignment polyline.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (px, py) = (i as f64, j as f64);
        let mut best = f64::INFINITY;
        for w in self.nodes.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (dx, dy) = (x1 - x0, y1 - y0);
            let len_sq = dx * dx + dy * dy;
            let t = if len_sq == 0.0 {
                0.0
            } else {
                (((px - x0) * dx + (py - y0) * dy) / len_sq).clamp(0.0, 1.0)
            };
            let (cx, cy) = (x0 + t * dx, y0 + t * dy);
            let d = ((px - cx).powi(2) + (py - cy).powi(2)).sqrt();
            best = best.min(d);
        }
        best
    }
}

/// A generated fixture: both corpus sides plus the ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub source: CorpusSide,
    pub target: CorpusSide,
    pub planted: Vec<PlantedPair>,
    pub warp: WarpMap,
    /// Target-offset ranges holding one-sided noise text.
    pub noise_ranges: Vec<(usize, usize)>,
}

impl SyntheticCorpus {
    /// Gold standard as consumed by evaluation: folded source word to the
    /// set of acceptable targets.
    pub fn gold_map(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for p in &self.planted {
            map.entry(p.source_word.to_lowercase())
                .or_default()
                .insert(p.target_word.clone());
        }
        map
    }

    pub fn planted_of_kind(&self, kind: PairKind) -> Vec<&PlantedPair> {
        self.planted.iter().filter(|p| p.kind == kind).collect()
    }
}

const SRC_ONSETS: [&str; 14] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w",
];
const SRC_VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const TGT_ONSETS: [&str; 12] = [
    "zh", "x", "q", "w", "ch", "sh", "h", "j", "l", "m", "g", "d",
];
const TGT_FINALS: [&str; 8] = ["ao", "ei", "ou", "an", "en", "ang", "ong", "u"];
const NOUN_TAGS: [&str; 3] = ["NN", "NNS", "NNP"];
const OTHER_TAGS: [&str; 14] = [
    "DT", "IN", "VB", "VBD", "VBZ", "JJ", "RB", "PRP", "CC", "MD", "TO", "CD", "VBG", "VBN",
];

fn source_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(SRC_ONSETS[rng.random_range(0..SRC_ONSETS.len())]);
        w.push_str(SRC_VOWELS[rng.random_range(0..SRC_VOWELS.len())]);
    }
    w
}

fn target_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(TGT_ONSETS[rng.random_range(0..TGT_ONSETS.len())]);
        w.push_str(TGT_FINALS[rng.random_range(0..TGT_FINALS.len())]);
    }
    w
}

fn fresh_word(
    rng: &mut ChaCha8Rng,
    gen: fn(&mut ChaCha8Rng) -> String,
    taken: &mut BTreeSet<String>,
) -> String {
    loop {
        let w = gen(rng);
        if taken.insert(w.clone()) {
            return w;
        }
    }
}

/// Zipf-flavored occurrence count for one filler type. The cap models the
/// frequency ceiling of the word class: nouns stay rare compared to
/// function words.
fn filler_count(rng: &mut ChaCha8Rng, cap: usize) -> usize {
    let u: f64 = rng.random_range(1e-6..1.0);
    ((2.0 / u.powf(0.85)) as usize).clamp(1, cap)
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

struct FillerType {
    word: String,
    tag: String,
}

/// Draws filler types and lays out `needed` filler tokens as a shuffled
/// bag of type indices.
fn filler_bag(
    rng: &mut ChaCha8Rng,
    needed: usize,
    tagged: bool,
    gen: fn(&mut ChaCha8Rng) -> String,
    taken: &mut BTreeSet<String>,
) -> (Vec<FillerType>, Vec<u32>) {
    let mut types = Vec::new();
    let mut bag: Vec<u32> = Vec::with_capacity(needed + 400);
    while bag.len() < needed {
        let idx = types.len() as u32;
        let tag = if !tagged {
            String::new()
        } else if rng.random_bool(0.25) {
            NOUN_TAGS[types.len() % NOUN_TAGS.len()].to_string()
        } else {
            OTHER_TAGS[rng.random_range(0..OTHER_TAGS.len())].to_string()
        };
        let word = fresh_word(rng, gen, taken);
        let word = if tag == "NNP" { capitalize(&word) } else { word };
        // Unaligned filler nouns stay low-frequency: in real parallel
        // text a frequent noun almost always has a counterpart, so a
        // high-count word with no translation at all would be an
        // artifact. Function words and target-side filler run high.
        let cap = if tagged && NOUN_TAGS.contains(&tag.as_str()) {
            60
        } else {
            3000
        };
        types.push(FillerType { word, tag });
        for _ in 0..filler_count(rng, cap) {
            bag.push(idx);
        }
    }
    bag.shuffle(rng);
    bag.truncate(needed);
    (types, bag)
}

fn sample_span_slots(
    rng: &mut ChaCha8Rng,
    count: usize,
    span: std::ops::Range<usize>,
    used: &mut HashSet<usize>,
) -> Vec<usize> {
    let mut slots = Vec::with_capacity(count);
    while slots.len() < count {
        let p = rng.random_range(span.clone());
        if used.insert(p) {
            slots.push(p);
        }
    }
    slots.sort_unstable();
    slots
}

/// Generates a fixture. Identical configs produce identical fixtures.
pub fn generate(cfg: &SynthConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let source_len = cfg.tokens;
    let target_len = cfg.tokens;
    let noise_total = (cfg.noise_fraction * target_len as f64).round() as usize;
    let clean_len = target_len - noise_total;

    // Base warp: piecewise-linear spans with slopes around 1, scaled so
    // the clean target range is covered exactly.
    let spans = cfg.warp_spans.max(1);
    let widths: Vec<f64> = (0..spans).map(|_| rng.random_range(0.5..1.5)).collect();
    let slopes: Vec<f64> = (0..spans).map(|_| rng.random_range(0.9..1.1)).collect();
    let width_sum: f64 = widths.iter().sum();
    let raised_sum: f64 = widths.iter().zip(&slopes).map(|(w, s)| w * s).sum();
    let mut clean_nodes: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut x = 0.0;
    let mut y = 0.0;
    for (w, s) in widths.iter().zip(&slopes) {
        x += w / width_sum * source_len as f64;
        y += w * s / raised_sum * clean_len as f64;
        clean_nodes.push((x, y));
    }
    clean_nodes.last_mut().unwrap().0 = source_len as f64;
    clean_nodes.last_mut().unwrap().1 = clean_len as f64;

    // Noise blocks: target-only inserts at random clean coordinates.
    // Sized well below the anchor jump bound so segmentation can step
    // over them.
    let block_count = if noise_total == 0 {
        0
    } else {
        (noise_total / 250).clamp(1, 60)
    };
    let mut block_sizes = vec![noise_total / block_count.max(1); block_count];
    if block_count > 0 {
        let assigned: usize = block_sizes.iter().sum();
        block_sizes[block_count - 1] += noise_total - assigned;
    }
    let mut block_clean_pos: Vec<f64> = (0..block_count)
        .map(|_| rng.random_range(0.05..0.95) * clean_len as f64)
        .collect();
    block_clean_pos.sort_by(f64::total_cmp);

    // Final warp nodes: clean vertices shifted by the noise inserted
    // before them, plus a vertical jump at each insertion point.
    let inserted_before = |clean_y: f64| -> f64 {
        block_clean_pos
            .iter()
            .zip(&block_sizes)
            .filter(|(&c, _)| c <= clean_y)
            .map(|(_, &b)| b as f64)
            .sum()
    };
    let clean_inverse = |c: f64| -> f64 {
        let idx = clean_nodes
            .partition_point(|n| n.1 <= c)
            .clamp(1, clean_nodes.len() - 1);
        let (x0, y0) = clean_nodes[idx - 1];
        let (x1, y1) = clean_nodes[idx];
        if y1 <= y0 {
            x0
        } else {
            x0 + (x1 - x0) * (c - y0) / (y1 - y0)
        }
    };
    let mut nodes: Vec<(f64, f64)> = clean_nodes
        .iter()
        .map(|&(x, y)| (x, y + inserted_before(y)))
        .collect();
    let mut noise_ranges = Vec::with_capacity(block_count);
    for (&c, &b) in block_clean_pos.iter().zip(&block_sizes) {
        let x = clean_inverse(c);
        let y_low = c + inserted_before(c) - b as f64;
        nodes.push((x, y_low));
        nodes.push((x, y_low + b as f64));
        noise_ranges.push((y_low.round() as usize, (y_low + b as f64).round() as usize));
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let warp = WarpMap { nodes };

    // Planted vocabulary.
    let n_high = (cfg.pairs as f64 * cfg.high_fraction).round() as usize;
    let mut taken_src = BTreeSet::new();
    let mut taken_tgt = BTreeSet::new();
    let mut planted = Vec::with_capacity(cfg.pairs);
    let mut planted_tags = Vec::with_capacity(cfg.pairs);
    for k in 0..cfg.pairs {
        let kind = if k < n_high {
            PairKind::HighFrequency
        } else {
            PairKind::LowFrequency
        };
        let count = match kind {
            PairKind::HighFrequency => rng.random_range(10..=40),
            PairKind::LowFrequency => rng.random_range(3..=6),
        };
        let tag = if rng.random_bool(0.4) { "NNP" } else { "NN" };
        let word = fresh_word(&mut rng, source_word, &mut taken_src);
        let word = if tag == "NNP" { capitalize(&word) } else { word };
        planted.push(PlantedPair {
            source_word: word,
            target_word: fresh_word(&mut rng, target_word, &mut taken_tgt),
            count,
            kind,
        });
        planted_tags.push(tag);
    }

    // Source positions: distinct random slots per planted word, confined
    // to a topical span of the text the way real content words cluster.
    let mut used_src: HashSet<usize> = HashSet::new();
    let plant_positions: Vec<Vec<usize>> = planted
        .iter()
        .map(|p| {
            let width = rng.random_range(0.35..1.0);
            let start = rng.random_range(0.0..(1.0 - width));
            let lo = (start * source_len as f64) as usize;
            let hi = (((start + width) * source_len as f64) as usize).min(source_len);
            let slots = sample_span_slots(&mut rng, p.count, lo..hi, &mut used_src);
            slots
        })
        .collect();

    // Target positions: warp plus jitter, probing past collisions and
    // noise ranges.
    let in_noise = |q: usize| {
        noise_ranges
            .iter()
            .any(|&(start, end)| q >= start && q < end)
    };
    let mut used_tgt: HashSet<usize> = HashSet::new();
    let jitter = cfg.jitter as i64;
    let mut plant_targets: Vec<Vec<usize>> = Vec::with_capacity(planted.len());
    for positions in &plant_positions {
        let mut targets = Vec::with_capacity(positions.len());
        for &p in positions {
            let base = warp.map(p) as i64 + rng.random_range(-jitter..=jitter);
            let base = base.clamp(0, target_len as i64 - 1) as usize;
            let mut q = base;
            loop {
                if q < target_len && !in_noise(q) && !used_tgt.contains(&q) {
                    break;
                }
                q += 1;
                if q >= target_len {
                    // Fall back to probing downward from the scaled spot.
                    q = base;
                    while q > 0 && (in_noise(q) || used_tgt.contains(&q)) {
                        q -= 1;
                    }
                    break;
                }
            }
            used_tgt.insert(q);
            targets.push(q);
        }
        targets.sort_unstable();
        plant_targets.push(targets);
    }

    // Filler text for every remaining slot.
    let src_filler_needed = source_len - used_src.len();
    let tgt_filler_needed = target_len - used_tgt.len();
    let (src_types, src_bag) = filler_bag(
        &mut rng,
        src_filler_needed,
        true,
        source_word,
        &mut taken_src,
    );
    let (tgt_types, tgt_bag) = filler_bag(
        &mut rng,
        tgt_filler_needed,
        false,
        target_word,
        &mut taken_tgt,
    );

    // Assemble both token streams.
    let mut src_tokens: Vec<Option<TaggedToken>> = vec![None; source_len];
    for ((pair, tag), positions) in planted.iter().zip(&planted_tags).zip(&plant_positions) {
        for &p in positions {
            src_tokens[p] = Some(TaggedToken {
                surface: pair.source_word.clone(),
                tag: tag.to_string(),
                offset: p,
            });
        }
    }
    let mut bag_iter = src_bag.into_iter();
    for (offset, slot) in src_tokens.iter_mut().enumerate() {
        if slot.is_none() {
            let t = &src_types[bag_iter.next().expect("bag sized to free slots") as usize];
            *slot = Some(TaggedToken {
                surface: t.word.clone(),
                tag: t.tag.clone(),
                offset,
            });
        }
    }

    let mut tgt_tokens: Vec<Option<TaggedToken>> = vec![None; target_len];
    for (pair, targets) in planted.iter().zip(&plant_targets) {
        for &q in targets {
            tgt_tokens[q] = Some(TaggedToken {
                surface: pair.target_word.clone(),
                tag: String::new(),
                offset: q,
            });
        }
    }
    let mut bag_iter = tgt_bag.into_iter();
    for (offset, slot) in tgt_tokens.iter_mut().enumerate() {
        if slot.is_none() {
            let t = &tgt_types[bag_iter.next().expect("bag sized to free slots") as usize];
            *slot = Some(TaggedToken {
                surface: t.word.clone(),
                tag: String::new(),
                offset,
            });
        }
    }

    SyntheticCorpus {
        source: CorpusSide::new(src_tokens.into_iter().map(Option::unwrap).collect()),
        target: CorpusSide::new(tgt_tokens.into_iter().map(Option::unwrap).collect()),
        planted,
        warp,
        noise_ranges,
    }
}

/// Writes a fixture to disk: tagged source, bare target, gold pairs, the
/// planted inventory and the warp polyline.
pub fn write_fixture(corpus: &SyntheticCorpus, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let render = |name: &str, content: String| -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };

    written.push(render("source.txt", wrap_tokens(&corpus.source, true))?);
    written.push(render("target.txt", wrap_tokens(&corpus.target, false))?);

    let mut gold = String::new();
    for p in &corpus.planted {
        let _ = writeln!(gold, "{}\t{}", p.source_word.to_lowercase(), p.target_word);
    }
    written.push(render("gold.tsv", gold)?);

    let mut inventory = String::from("source_word\ttarget_word\tkind\tcount\n");
    for p in &corpus.planted {
        let kind = match p.kind {
            PairKind::HighFrequency => "high",
            PairKind::LowFrequency => "low",
        };
        let _ = writeln!(
            inventory,
            "{}\t{}\t{}\t{}",
            p.source_word, p.target_word, kind, p.count
        );
    }
    written.push(render("planted.tsv", inventory)?);

    let mut warp = String::from("source\ttarget\n");
    for &(x, y) in corpus.warp.nodes() {
        let _ = writeln!(warp, "{x:.1}\t{y:.1}");
    }
    written.push(render("warp.tsv", warp)?);

    Ok(written)
}

fn wrap_tokens(side: &CorpusSide, tagged: bool) -> String {
    let mut out = String::new();
    for (k, token) in side.tokens().iter().enumerate() {
        if k > 0 {
            out.push(if k % 20 == 0 { '\n' } else { ' ' });
        }
        if tagged {
            out.push_str(&token.to_text());
        } else {
            out.push_str(&token.surface);
        }
    }
    out.push('\n');
    out
}
