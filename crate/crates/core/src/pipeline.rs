//! End-to-end orchestration: configuration, the staged run, evaluation
//! and file emission.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::anchors::{
    collect_path_points, filter_anchor_points, segment_texts, AnchorConfig, AnchorScan,
    Segmentation,
};
use crate::binvec::{binary_vector, select_secondary, BinaryVector, Side};
use crate::corpus::{load_tagged_file, noun_positions, CorpusSide, TagFilter, TokenFormat};
use crate::dtw::{score_pairs, select_primary, ScoredPair};
use crate::error::{Error, Result};
use crate::io;
use crate::lexicon::LexiconEntry;
use crate::posvec::{build_signals, candidate_pairs, PrefilterConfig};

/// All thresholds and knobs of the pipeline, CLI- and file-overridable.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Tags admitted on the source side.
    pub noun_tags: BTreeSet<String>,
    /// Minimum occurrence count for the warp-matching stage.
    pub min_frequency: usize,
    /// Maximum occurrence-count ratio between pair members.
    pub max_freq_ratio: f64,
    /// Maximum difference of length-normalized first occurrences.
    pub max_start_offset_ratio: f64,
    /// Maximum (mean, std) distance between gap distributions.
    pub euclid_threshold: f64,
    /// Maximum normalized warp cost admitted into the primary lexicon.
    pub dtw_threshold: f64,
    /// Optional diagonal band half width for warp matching.
    pub dtw_band: Option<usize>,
    /// Maximum candidates kept per source word.
    pub top_n: usize,
    /// Half width of the anchor diagonal band, fraction of target length.
    pub slope_band_fraction: f64,
    /// Minimum source spacing of anchors; derived from text length when
    /// unset.
    pub min_gap_source: Option<usize>,
    /// Maximum target jump between anchors; derived from text length when
    /// unset.
    pub max_jump_target: Option<usize>,
    /// Confidence gate for the secondary stage.
    pub t_threshold: f64,
    /// Minimum occurrence count for the secondary stage, both sides.
    pub min_secondary_freq: usize,
    pub dump_signals: bool,
    pub dump_paths: bool,
    pub dump_anchors: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            noun_tags: ["NN", "NNS", "NNP", "NNPS"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            min_frequency: 10,
            max_freq_ratio: 2.0,
            max_start_offset_ratio: 0.3,
            euclid_threshold: 1200.0,
            dtw_threshold: 400.0,
            dtw_band: None,
            top_n: 3,
            slope_band_fraction: 0.1,
            min_gap_source: None,
            max_jump_target: None,
            t_threshold: 1.65,
            min_secondary_freq: 3,
            dump_signals: false,
            dump_paths: false,
            dump_anchors: false,
        }
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting named after its CLI flag.
    pub fn apply_key_value(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: &str| Error::Config {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        let parse_usize = |v: &str| v.trim().parse::<usize>().map_err(|_| bad("expected an integer"));
        let parse_f64 = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let parse_bool = |v: &str| match v.trim() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(bad("expected a boolean")),
        };
        match key {
            "noun-tags" => {
                let tags: BTreeSet<String> = value
                    .split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect();
                if tags.is_empty() {
                    return Err(bad("expected a comma-separated tag list"));
                }
                self.noun_tags = tags;
            }
            "min-freq" => self.min_frequency = parse_usize(value)?,
            "max-freq-ratio" => self.max_freq_ratio = parse_f64(value)?,
            "max-start-offset" => self.max_start_offset_ratio = parse_f64(value)?,
            "euclid-threshold" => self.euclid_threshold = parse_f64(value)?,
            "dtw-threshold" => self.dtw_threshold = parse_f64(value)?,
            "dtw-band" => self.dtw_band = Some(parse_usize(value)?),
            "top-n" => {
                let n = parse_usize(value)?;
                if n == 0 {
                    return Err(bad("must be at least 1"));
                }
                self.top_n = n;
            }
            "slope-band" => self.slope_band_fraction = parse_f64(value)?,
            "min-gap-source" => self.min_gap_source = Some(parse_usize(value)?),
            "max-jump-target" => self.max_jump_target = Some(parse_usize(value)?),
            "t-threshold" => self.t_threshold = parse_f64(value)?,
            "min-secondary-freq" => self.min_secondary_freq = parse_usize(value)?,
            "dump-signals" => self.dump_signals = parse_bool(value)?,
            "dump-paths" => self.dump_paths = parse_bool(value)?,
            "dump-anchors" => self.dump_anchors = parse_bool(value)?,
            _ => return Err(bad("unknown key")),
        }
        Ok(())
    }

    /// Loads `key = value` lines ('#' starts a comment) over the current
    /// settings.
    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                key: line.to_string(),
                reason: "expected key = value".to_string(),
            })?;
            self.apply_key_value(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Anchor spacing, scaled to the source length when not set. Spacing
    /// governs segment granularity; segments must stay wide relative to
    /// positional jitter or occupancy bits of rare words flip at the
    /// boundaries and the secondary stage starves.
    pub fn effective_min_gap(&self, source_len: usize) -> usize {
        self.min_gap_source.unwrap_or((source_len / 1000).max(5))
    }

    /// Anchor jump bound, scaled to the target length when not set. The
    /// bound must comfortably exceed the sparsest stretch of the path
    /// cloud: one jump past it strands the scan for good, since the gap
    /// to the previous kept anchor only ever grows.
    pub fn effective_max_jump(&self, target_len: usize) -> usize {
        self.max_jump_target.unwrap_or((target_len / 40).max(1))
    }

    /// Deterministic echo of every effective setting.
    fn render(&self, source_len: usize, target_len: usize) -> String {
        let tags: Vec<&str> = self.noun_tags.iter().map(|s| s.as_str()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "noun-tags\t{}", tags.join(","));
        let _ = writeln!(out, "min-freq\t{}", self.min_frequency);
        let _ = writeln!(out, "max-freq-ratio\t{}", self.max_freq_ratio);
        let _ = writeln!(out, "max-start-offset\t{}", self.max_start_offset_ratio);
        let _ = writeln!(out, "euclid-threshold\t{}", self.euclid_threshold);
        let _ = writeln!(out, "dtw-threshold\t{}", self.dtw_threshold);
        let _ = writeln!(
            out,
            "dtw-band\t{}",
            self.dtw_band.map(|b| b.to_string()).unwrap_or_else(|| "off".into())
        );
        let _ = writeln!(out, "top-n\t{}", self.top_n);
        let _ = writeln!(out, "slope-band\t{}", self.slope_band_fraction);
        let _ = writeln!(out, "min-gap-source\t{}", self.effective_min_gap(source_len));
        let _ = writeln!(out, "max-jump-target\t{}", self.effective_max_jump(target_len));
        let _ = writeln!(out, "t-threshold\t{}", self.t_threshold);
        let _ = writeln!(out, "min-secondary-freq\t{}", self.min_secondary_freq);
        out
    }
}

/// Stage counters and timings of one run.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub source_tokens: usize,
    pub target_tokens: usize,
    pub source_noun_types: usize,
    pub target_word_types: usize,
    pub source_signals: usize,
    pub target_signals: usize,
    pub candidate_pairs: usize,
    pub primary_entries: usize,
    pub primary_pairs: usize,
    pub path_points: usize,
    pub anchor_points: usize,
    pub segments: usize,
    pub noise_segments: usize,
    pub secondary_candidates: usize,
    pub secondary_entries: usize,
    pub total_entries: usize,
    /// Wall time per stage. Logged, never written to the report file, so
    /// reruns stay byte-identical.
    pub timings: Vec<(&'static str, Duration)>,
}

impl RunReport {
    /// Deterministic report body (no timings).
    pub fn render(&self, cfg: &PipelineConfig) -> String {
        let mut out = String::from("lexforge run report\n\ncounts\n");
        let mut row = |k: &str, v: usize| {
            let _ = writeln!(out, "{k}\t{v}");
        };
        row("source_tokens", self.source_tokens);
        row("target_tokens", self.target_tokens);
        row("source_noun_types", self.source_noun_types);
        row("target_word_types", self.target_word_types);
        row("source_signals", self.source_signals);
        row("target_signals", self.target_signals);
        row("candidate_pairs", self.candidate_pairs);
        row("primary_entries", self.primary_entries);
        row("primary_pairs", self.primary_pairs);
        row("path_points", self.path_points);
        row("anchor_points", self.anchor_points);
        row("segments", self.segments);
        row("noise_segments", self.noise_segments);
        row("secondary_candidates", self.secondary_candidates);
        row("secondary_entries", self.secondary_entries);
        row("total_entries", self.total_entries);
        out.push_str("\nconfig\n");
        out.push_str(&cfg.render(self.source_tokens, self.target_tokens));
        out
    }
}

/// Intermediate artifacts retained for diagnostic dumps.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub source_signals_csv: Option<String>,
    pub target_signals_csv: Option<String>,
    pub pairs_csv: Option<String>,
    pub paths_csv: Option<String>,
    pub anchor_scan: Option<AnchorScan>,
    pub binvec_source_tsv: Option<String>,
    pub binvec_target_tsv: Option<String>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Primary entries first, then secondary; each block ordered by
    /// folded source word.
    pub lexicon: Vec<LexiconEntry>,
    pub report: RunReport,
    pub segmentation: Segmentation,
    pub diagnostics: Diagnostics,
}

/// Loads both corpus files and runs the full pipeline.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    source_path: &Path,
    target_path: &Path,
) -> Result<RunOutput> {
    let started = Instant::now();
    let source = load_tagged_file(source_path, TokenFormat::SlashTag)?;
    if source.is_empty() {
        return Err(Error::EmptyCorpus {
            path: source_path.to_path_buf(),
        });
    }
    let target = load_tagged_file(target_path, TokenFormat::Bare)?;
    if target.is_empty() {
        return Err(Error::EmptyCorpus {
            path: target_path.to_path_buf(),
        });
    }
    let load_time = started.elapsed();
    let mut out = run_on_sides(cfg, &source, &target)?;
    out.report.timings.insert(0, ("load", load_time));
    Ok(out)
}

/// Runs the pipeline over already-loaded corpus sides.
pub fn run_on_sides(
    cfg: &PipelineConfig,
    source: &CorpusSide,
    target: &CorpusSide,
) -> Result<RunOutput> {
    let mut report = RunReport {
        source_tokens: source.len(),
        target_tokens: target.len(),
        ..RunReport::default()
    };
    let mut diagnostics = Diagnostics::default();

    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    // Indexing: tagged nouns on the source side, every word on the target.
    let source_filter = TagFilter::Tags(cfg.noun_tags.clone());
    let source_positions = noun_positions(source, &source_filter, true);
    if source_positions.is_empty() {
        return Err(Error::NoSourceNouns);
    }
    let target_positions = noun_positions(target, &TagFilter::Any, false);
    report.source_noun_types = source_positions.len();
    report.target_word_types = target_positions.len();
    lap("index", &mut report.timings);

    // Gap signals for words occurring at least twice.
    let source_signals = build_signals(&source_positions);
    let target_signals = build_signals(&target_positions);
    report.source_signals = source_signals.len();
    report.target_signals = target_signals.len();
    if cfg.dump_signals {
        diagnostics.source_signals_csv = Some(io::write_signals_csv(&source_signals));
        diagnostics.target_signals_csv = Some(io::write_signals_csv(&target_signals));
    }
    lap("signals", &mut report.timings);

    // Statistical prefilter.
    let prefilter = PrefilterConfig {
        min_frequency: cfg.min_frequency,
        max_freq_ratio: cfg.max_freq_ratio,
        max_start_offset_ratio: cfg.max_start_offset_ratio,
        euclid_threshold: cfg.euclid_threshold,
    };
    let pairs = candidate_pairs(
        &source_signals,
        source.len(),
        &target_signals,
        target.len(),
        &prefilter,
    );
    report.candidate_pairs = pairs.len();
    lap("prefilter", &mut report.timings);

    // Warp matching and primary selection.
    let scored = score_pairs(&pairs, &source_signals, &target_signals, cfg.dtw_band)?;
    lap("dtw", &mut report.timings);

    let primary = select_primary(&scored, cfg.dtw_threshold, cfg.top_n);
    let primary_keys: BTreeSet<String> = primary.iter().map(|e| e.source_key()).collect();
    let selected: BTreeSet<(String, String)> = primary
        .iter()
        .flat_map(|e| {
            let key = e.source_key();
            e.candidates
                .iter()
                .map(move |c| (key.clone(), c.target_word.clone()))
        })
        .collect();
    let primary_pairs: Vec<&ScoredPair> = scored
        .iter()
        .filter(|sp| selected.contains(&(sp.source.clone(), sp.target.clone())))
        .collect();
    report.primary_entries = primary.len();
    report.primary_pairs = primary_pairs.len();
    if cfg.dump_paths {
        let owned: Vec<ScoredPair> = primary_pairs.iter().map(|&p| p.clone()).collect();
        diagnostics.pairs_csv = Some(io::write_pairs_csv(&owned));
        diagnostics.paths_csv = Some(io::write_paths_csv(&owned));
    }
    lap("select_primary", &mut report.timings);

    // Anchor points from the pooled warp paths.
    let points = collect_path_points(&primary_pairs, &source_positions, &target_positions)?;
    let anchor_cfg = AnchorConfig {
        slope_band_fraction: cfg.slope_band_fraction,
        min_gap_source: cfg.effective_min_gap(source.len()),
        max_jump_target: cfg.effective_max_jump(target.len()),
    };
    let scan = filter_anchor_points(&points, &anchor_cfg, source.len(), target.len());
    report.path_points = points.len();
    report.anchor_points = scan.anchors.count();
    if scan.anchors.count() < 2 {
        log::warn!(
            "only {} anchor point(s) survived filtering; the secondary lexicon will be weak",
            scan.anchors.count()
        );
    }
    lap("anchors", &mut report.timings);

    let segmentation = segment_texts(&scan.anchors, source.len(), target.len())?;
    report.segments = segmentation.segment_count();
    report.noise_segments = segmentation.noise_flags().iter().filter(|&&f| f).count();
    lap("segment", &mut report.timings);

    // Segment-occupancy vectors for the low-frequency stage.
    let mut source_vectors: BTreeMap<String, BinaryVector> = BTreeMap::new();
    for (word, p) in &source_positions {
        if p.count() >= cfg.min_secondary_freq && !primary_keys.contains(word) {
            source_vectors.insert(word.clone(), binary_vector(p, &segmentation, Side::Source)?);
        }
    }
    let mut target_vectors: BTreeMap<String, BinaryVector> = BTreeMap::new();
    for (word, p) in &target_positions {
        if p.count() >= cfg.min_secondary_freq {
            target_vectors.insert(word.clone(), binary_vector(p, &segmentation, Side::Target)?);
        }
    }
    report.secondary_candidates = source_vectors.len();
    if cfg.dump_anchors {
        diagnostics.anchor_scan = Some(scan);
        diagnostics.binvec_source_tsv = Some(io::write_binvec_tsv(&source_vectors));
        diagnostics.binvec_target_tsv = Some(io::write_binvec_tsv(&target_vectors));
    }
    lap("binvec", &mut report.timings);

    let secondary = select_secondary(
        &source_vectors,
        &target_vectors,
        cfg.t_threshold,
        cfg.top_n,
        &primary_keys,
    );
    report.secondary_entries = secondary.len();
    lap("secondary", &mut report.timings);

    let mut lexicon = primary;
    lexicon.extend(secondary);
    report.total_entries = lexicon.len();

    for (stage, took) in &report.timings {
        log::info!("{stage}: {took:?}");
    }

    Ok(RunOutput {
        lexicon,
        report,
        segmentation,
        diagnostics,
    })
}

/// One row of a precision report.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrecisionRow {
    pub emitted: usize,
    pub hits: usize,
}

impl PrecisionRow {
    pub fn precision(&self) -> f64 {
        if self.emitted == 0 {
            0.0
        } else {
            self.hits as f64 / self.emitted as f64
        }
    }
}

/// Precision@n split by stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub n: usize,
    pub primary: PrecisionRow,
    pub secondary: PrecisionRow,
    pub total: PrecisionRow,
}

impl PrecisionReport {
    pub fn render(&self) -> String {
        let mut out = format!("lexicon\temitted\thits\tprecision@{}\n", self.n);
        for (name, row) in [
            ("primary", self.primary),
            ("secondary", self.secondary),
            ("total", self.total),
        ] {
            let _ = writeln!(
                out,
                "{name}\t{}\t{}\t{:.3}",
                row.emitted,
                row.hits,
                row.precision()
            );
        }
        out
    }
}

/// Scores a lexicon against a gold map: an emitted source word counts as
/// a hit when any of its top-n candidates is an acceptable target. Source
/// words are compared case-folded.
pub fn evaluate(
    lexicon: &[LexiconEntry],
    gold: &BTreeMap<String, BTreeSet<String>>,
    n: usize,
) -> PrecisionReport {
    let mut primary = PrecisionRow::default();
    let mut secondary = PrecisionRow::default();
    for entry in lexicon {
        let row = match entry.stage {
            crate::lexicon::Stage::Primary => &mut primary,
            crate::lexicon::Stage::Secondary => &mut secondary,
        };
        row.emitted += 1;
        let acceptable = gold.get(&entry.source_key());
        let hit = acceptable.is_some_and(|set| {
            entry
                .candidates
                .iter()
                .filter(|c| c.rank <= n)
                .any(|c| set.contains(&c.target_word))
        });
        if hit {
            row.hits += 1;
        }
    }
    let total = PrecisionRow {
        emitted: primary.emitted + secondary.emitted,
        hits: primary.hits + secondary.hits,
    };
    PrecisionReport {
        n,
        primary,
        secondary,
        total,
    }
}

/// Writes the lexicon, report and any requested diagnostic dumps into
/// `out_dir`, returning the written paths.
pub fn emit_outputs(out: &RunOutput, cfg: &PipelineConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let emit = |name: &str, content: &str| -> Result<PathBuf> {
        let path = out_dir.join(name);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };

    written.push(emit("lexicon.tsv", &io::write_lexicon_tsv(&out.lexicon))?);
    written.push(emit("report.txt", &out.report.render(cfg))?);

    let d = &out.diagnostics;
    if let Some(csv) = &d.source_signals_csv {
        written.push(emit("signals_source.csv", csv)?);
    }
    if let Some(csv) = &d.target_signals_csv {
        written.push(emit("signals_target.csv", csv)?);
    }
    if let Some(csv) = &d.pairs_csv {
        written.push(emit("pairs.csv", csv)?);
    }
    if let Some(csv) = &d.paths_csv {
        written.push(emit("paths.csv", csv)?);
    }
    if let Some(scan) = &d.anchor_scan {
        written.push(emit("anchors.csv", &io::write_anchor_csv(scan))?);
        written.push(emit(
            "anchors.svg",
            &io::write_anchor_svg(
                scan,
                out.segmentation.source_len(),
                out.segmentation.target_len(),
            ),
        )?);
        written.push(emit("segments.tsv", &io::write_segments_tsv(&out.segmentation))?);
    }
    if let Some(tsv) = &d.binvec_source_tsv {
        written.push(emit("binvec_source.tsv", tsv)?);
    }
    if let Some(tsv) = &d.binvec_target_tsv {
        written.push(emit("binvec_target.tsv", tsv)?);
    }
    Ok(written)
}
